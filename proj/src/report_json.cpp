#include "tslab/report_json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tslab {

using nlohmann::json;

namespace {

json range_json(const IndexRange& r) { return {r.begin, r.end}; }

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

json to_json(const AdfReport& r) {
  return {{"statistic", r.statistic},
          {"p_value", r.p_value},
          {"lags_used", r.lags_used},
          {"max_lags", r.max_lags},
          {"n_obs", r.n_obs},
          {"regression", to_string(r.regression)},
          {"critical_values", {{"1%", r.critical_values[0]}, {"5%", r.critical_values[1]}, {"10%", r.critical_values[2]}}},
          {"best_aic", r.best_aic},
          {"rejects_unit_root_1pct", r.rejects_unit_root(0)}};
}

json to_json(const LeakageAudit& a) {
  return {{"max_cross_overlap", a.max_cross_overlap},
          {"mean_cross_overlap", a.mean_cross_overlap},
          {"violating_pairs", a.violating_pairs},
          {"label_overlap_pairs", a.label_overlap_pairs}};
}

json to_json(const SplitPlan& p) {
  return {{"train_range", range_json(p.train_range)},
          {"val_range", range_json(p.val_range)},
          {"test_range", range_json(p.test_range)},
          {"ranges_are_positions", p.shuffled_before_split},
          {"shuffled_before_split", p.shuffled_before_split},
          {"embargo", p.embargo},
          {"seed", p.seed},
          {"train_order", p.train_order},
          {"val_indices", p.val_indices},
          {"test_indices", p.test_indices},
          {"leakage", to_json(p.leakage)}};
}

json label_summary(const LabelVector& l) {
  json params = {{"ma_period", l.params.ma_period},
                 {"qclass", {l.params.qclass.up_min, l.params.qclass.down_max}},
                 {"trend_method", to_string(l.params.trend_method)},
                 {"direction_threshold", l.params.direction_threshold}};
  if (l.family == LabelFamily::probe_condition) params["condition"] = to_string(l.params.condition);
  json out = {{"family", to_string(l.family)},
              {"horizon", l.horizon},
              {"count", l.size()},
              {"class_count", l.class_count},
              {"params", std::move(params)},
              {"warnings", l.warnings}};
  if (l.is_classifier()) {
    out["histogram"] = l.histogram();
  } else if (l.size() > 0) {
    // Ten equal-width bins over [min, max].
    const double lo = l.values.minCoeff();
    const double hi = l.values.maxCoeff();
    std::vector<Eigen::Index> bins(10, 0);
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      const auto b = hi > lo ? static_cast<std::size_t>((l.values[i] - lo) / (hi - lo) * 10.0) : 0;
      ++bins[std::min<std::size_t>(b, 9)];
    }
    out["histogram"] = {{"min", lo}, {"max", hi}, {"counts", bins}};
  }
  return out;
}

json to_json(const ProbeReport& r) {
  json precision = json::array();
  for (const double p : r.precision) precision.push_back(std::isnan(p) ? json(nullptr) : json(p));
  json confusion = json::array();
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.confusion.cols(); ++j) row.push_back(r.confusion(i, j));
    confusion.push_back(std::move(row));
  }
  return {{"accuracy", r.accuracy},
          {"precision", std::move(precision)},
          {"confusion", std::move(confusion)},
          {"confusion_layout", "rows=actual, columns=predicted"},
          {"train_size", r.train_size},
          {"val_size", r.val_size},
          {"final_train_loss", r.train_loss.empty() ? 0.0 : r.train_loss.back()},
          {"final_val_loss", r.val_loss.empty() ? 0.0 : r.val_loss.back()},
          {"epochs", r.train_loss.size()}};
}

void write_labels_csv(const std::filesystem::path& path, const LabelVector& labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "end_index,value\n";
  out.precision(17);
  for (Eigen::Index k = 0; k < labels.size(); ++k) {
    out << labels.end_indices[static_cast<std::size_t>(k)] << ',';
    if (labels.is_classifier()) {
      out << labels.class_of(k);
    } else {
      out << labels.values[k];
    }
    out << '\n';
  }
}

void write_losses_csv(const std::filesystem::path& path, const ProbeReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epoch,train_loss,val_loss\n";
  out.precision(17);
  for (std::size_t e = 0; e < report.train_loss.size(); ++e) {
    out << e + 1 << ',' << report.train_loss[e] << ',';
    if (e < report.val_loss.size()) out << report.val_loss[e];
    out << '\n';
  }
}

std::string format_adf(const AdfReport& r) {
  std::ostringstream s;
  s << "ADF statistic      " << fixed(r.statistic, 6) << '\n'
    << "p-value            " << fixed(r.p_value, 6) << '\n'
    << "lags used          " << r.lags_used << " (max " << r.max_lags << ")\n"
    << "observations       " << r.n_obs << '\n'
    << "regression         " << to_string(r.regression) << '\n'
    << "critical 1%        " << fixed(r.critical_values[0], 4) << '\n'
    << "critical 5%        " << fixed(r.critical_values[1], 4) << '\n'
    << "critical 10%       " << fixed(r.critical_values[2], 4) << '\n'
    << "unit root rejected " << (r.rejects_unit_root(0) ? "yes (1%)" : "no (1%)") << '\n';
  return s.str();
}

std::string format_probe(const ProbeReport& r, const std::string& title) {
  std::ostringstream s;
  s << title << '\n'
    << "  accuracy   " << fixed(r.accuracy, 4) << "  (val " << r.val_size << ", train " << r.train_size << ")\n";
  for (std::size_t c = 0; c < r.precision.size(); ++c) {
    s << "  precision[" << c << "] " << fixed(r.precision[c], 4) << '\n';
  }
  s << "  confusion (rows actual, cols predicted)\n";
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    s << "   ";
    for (Eigen::Index j = 0; j < r.confusion.cols(); ++j) {
      char buf[16];
      std::snprintf(buf, sizeof buf, " %7d", r.confusion(i, j));
      s << buf;
    }
    s << '\n';
  }
  if (!r.train_loss.empty()) {
    s << "  final loss train " << fixed(r.train_loss.back(), 4);
    if (!r.val_loss.empty()) s << "  val " << fixed(r.val_loss.back(), 4);
    s << '\n';
  }
  return s.str();
}

}  // namespace tslab
