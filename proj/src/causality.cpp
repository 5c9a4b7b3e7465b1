#include "mfpanel/causality.hpp"

#include "mfpanel/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <sstream>

namespace mfp {

std::string wald_marker(double p_value) {
  if (p_value < 0.01) return "a";
  if (p_value < 0.05) return "b";
  return "";
}

nlohmann::json WaldTestResult::to_json() const {
  return {{"null_hypothesis", null_label}, {"chi_square", statistic}, {"df", df},
          {"p_value", p_value},            {"lags", lags},            {"marker", marker}};
}

WaldTestResult robust_wald_test(const LaggedDesign& design, const std::vector<std::string>& restricted,
                                std::string null_label) {
  if (restricted.empty()) throw InvalidArgument("no restricted coefficients");
  std::vector<Eigen::Index> idx;
  for (const auto& r : restricted) {
    auto it = std::find(design.names.begin(), design.names.end(), r);
    if (it == design.names.end()) throw LookupError("design has no column '" + r + "'");
    idx.push_back(it - design.names.begin());
  }
  const auto n = design.X.rows();
  const auto k = design.X.cols();
  const int groups = static_cast<int>(design.entity_ids.size());
  const MatrixXd Xw = within_transform(design.X, design.entity, groups);
  const VectorXd yw = within_transform(design.y, design.entity, groups);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (Xw.col(idx[j]).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, design.X.col(idx[j]).cwiseAbs().maxCoeff())) {
      throw DegenerateInput("column '" + restricted[j] + "' has no within-entity variation");
    }
  }
  const double dof = static_cast<double>(n - k - groups);
  if (dof <= 0) throw InsufficientData("too few observations for the fixed-effects regression");
  const auto fit = ols(Xw, yw);
  MatrixXd meat = MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const VectorXd xi = Xw.row(i).transpose();
    meat.noalias() += fit.residuals(i) * fit.residuals(i) * xi * xi.transpose();
  }
  const MatrixXd V = fit.xtx_inv * meat * fit.xtx_inv * (static_cast<double>(n) / dof);
  const auto q = static_cast<Eigen::Index>(idx.size());
  VectorXd b(q);
  MatrixXd Vr(q, q);
  for (Eigen::Index a = 0; a < q; ++a) {
    b(a) = fit.coef(idx[a]);
    for (Eigen::Index c = 0; c < q; ++c) Vr(a, c) = V(idx[a], idx[c]);
  }
  Eigen::LDLT<MatrixXd> ldlt(Vr);
  const double scale = Vr.diagonal().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(scale > 0) || ldlt.vectorD().minCoeff() <= 1e-14 * scale) {
    throw NumericalError("restricted covariance matrix is singular");
  }
  WaldTestResult out;
  out.null_label = std::move(null_label);
  out.statistic = std::max(0.0, b.dot(ldlt.solve(b)));
  out.df = static_cast<int>(q);
  out.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(q), out.statistic));
  out.marker = wald_marker(out.p_value);
  return out;
}

WaldTestResult granger_wald_test(const PanelDataset& panel, const std::string& cause, const std::string& effect,
                                 int lags, const std::vector<std::string>& controls) {
  if (lags < 1) throw InvalidArgument("Granger test needs at least one lag");
  if (cause == effect) throw InvalidArgument("cause and effect are the same series");
  const auto ci = panel.variable_index(cause);
  std::size_t longest = 0;
  for (int e = 0; e < static_cast<int>(panel.n_entities()); ++e) {
    auto [f, l] = panel.entity_rows(e);
    longest = std::max(longest, l - f);
  }
  if (static_cast<std::size_t>(lags) >= longest) {
    throw InsufficientData(std::to_string(lags) + " lags need more than " + std::to_string(longest) +
                           " periods per entity");
  }
  const auto present = panel.present_values(ci);
  if (std::all_of(present.begin(), present.end(), [](double v) { return v == 0.0; })) {
    throw DegenerateInput("cause series '" + cause + "' is identically zero");
  }
  std::vector<std::string> lagged{effect, cause};
  for (const auto& c : controls) {
    if (c != cause && c != effect) lagged.push_back(c);
  }
  const auto design = build_lagged_design(panel, effect, {}, lagged, lags);
  std::vector<std::string> restricted;
  for (int l = 1; l <= lags; ++l) restricted.push_back(lag_name(cause, l));
  auto res = robust_wald_test(design, restricted, cause + " does not Granger cause " + effect);
  res.lags = lags;
  return res;
}

GrangerReport granger_suite(const PanelDataset& panel, const std::string& effect,
                            const std::vector<std::string>& causes, int lags,
                            const std::vector<std::string>& controls) {
  GrangerReport rep;
  rep.effect = effect;
  rep.lags = lags;
  for (const auto& c : causes) {
    GrangerRow row;
    row.cause = c;
    try {
      row.result = granger_wald_test(panel, c, effect, lags, controls);
    } catch (const Error& e) {
      row.error = e.what();
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::string GrangerReport::to_csv() const {
  std::ostringstream s;
  s << "null_hypothesis,chi_square,df,p_value,marker,error\n";
  for (const auto& r : rows) {
    if (r.result) {
      s << '"' << r.result->null_label << "\"," << format_number(r.result->statistic) << ',' << r.result->df << ','
        << format_number(r.result->p_value) << ',' << r.result->marker << ",\n";
    } else {
      std::string err = r.error;
      std::replace(err.begin(), err.end(), '"', '\'');
      s << '"' << r.cause << " does not Granger cause " << effect << "\",,,,,\"" << err << "\"\n";
    }
  }
  return s.str();
}

nlohmann::json GrangerReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    if (r.result) {
      rows_json.push_back(r.result->to_json());
    } else {
      rows_json.push_back({{"null_hypothesis", r.cause + " does not Granger cause " + effect}, {"error", r.error}});
    }
  }
  return {{"test", "Wald test of Granger causality"},
          {"effect", effect},
          {"lags", lags},
          {"covariance", "HC1 with entity fixed effects"},
          {"rows", rows_json}};
}

}  // namespace mfp
