#include "tslab/adf.hpp"
#include "tslab/error.hpp"
#include "tslab/labeling.hpp"
#include "tslab/market_data.hpp"
#include "tslab/pipeline.hpp"
#include "tslab/probe.hpp"
#include "tslab/report_json.hpp"
#include "tslab/scaling.hpp"
#include "tslab/splitting.hpp"
#include "tslab/tensor_io.hpp"
#include "tslab/windowing.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace tslab;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kData = 2, kInternal = 3 };

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  bool json = false;
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::istringstream cell(item);
    T v{};
    if (!(cell >> v)) throw ConfigError(std::string("--") + what + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::array<double, 3> parse_fractions(const std::string& text) {
  const auto f = parse_list<double>(text, "fractions");
  if (f.size() != 3) throw ConfigError("--fractions: expected train,val,test");
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) throw ConfigError("--fractions: must sum to 1");
  return {f[0], f[1], f[2]};
}

AdfRegression parse_regression(const std::string& s) {
  if (s == "c") return AdfRegression::constant;
  if (s == "ct") return AdfRegression::constant_and_trend;
  throw ConfigError("--regression: expected c or ct");
}

ReturnKind parse_return_kind(const std::string& s) {
  if (s == "simple") return ReturnKind::simple;
  if (s == "log") return ReturnKind::log;
  throw ConfigError("--return-kind: expected simple or log");
}

ScaleMethod parse_method(const std::string& s) {
  if (s == "minmax") return ScaleMethod::minmax;
  if (s == "standardize") return ScaleMethod::standardize;
  throw ConfigError("--method: expected minmax or standardize");
}

std::filesystem::path out_dir(const Globals& g, const std::string& fallback = ".") {
  std::filesystem::path dir = g.output_dir.empty() ? fallback : g.output_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json series_summary(const BarSeries& s) {
  return {{"symbol", s.symbol()},
          {"bars", s.size()},
          {"first", format_timestamp(s.bars().front().timestamp)},
          {"last", format_timestamp(s.bars().back().timestamp)},
          {"fields", {{"open", s.fields().open}, {"high_low", s.fields().high_low}, {"volume", s.fields().volume}}}};
}

std::vector<Eigen::Index> slice_ends(Eigen::Index length, Eigen::Index lookback, Eigen::Index stride,
                                     Eigen::Index horizon, Eigen::Index first_start) {
  SliceSpec spec;
  spec.lookback = lookback;
  spec.stride = stride;
  spec.label_horizon = horizon;
  spec.first_start = first_start;
  spec.validate();
  const Eigen::Index k = spec.slice_count(length);
  if (k == 0) throw DataError("series too short for lookback " + std::to_string(lookback));
  std::vector<Eigen::Index> ends;
  for (Eigen::Index i = 0; i < k; ++i) ends.push_back(first_start + i * stride + lookback - 1);
  return ends;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tslab: time-series dataset construction, leakage auditing and probing"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Pipeline config file (JSON)");
  app.add_option("--seed", g.seed, "Override every RNG seed");
  app.add_option("--output-dir", g.output_dir, "Directory for written artifacts");
  app.add_flag("--json", g.json, "Print JSON instead of text");

  CsvSchema schema;
  std::string input;
  auto add_input = [&](CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--input", input, "OHLCV CSV file");
    if (required) opt->required();
    cmd->add_option("--date-column", schema.timestamp, "Timestamp column name");
    cmd->add_option("--close-column", schema.close, "Close column name");
    cmd->add_option("--symbol", schema.symbol, "Instrument symbol");
  };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load and validate a CSV, optionally export returns");
  add_input(ingest);
  std::string return_kind = "simple";
  bool export_returns = false;
  ingest->add_option("--return-kind", return_kind, "simple or log");
  ingest->add_flag("--export-returns", export_returns, "Write returns.csv to the output directory");

  // adf
  auto* adf = app.add_subcommand("adf", "Augmented Dickey-Fuller test on one column");
  add_input(adf);
  std::string column = "close";
  int diff = 0;
  std::string regression = "c";
  std::optional<Eigen::Index> max_lags;
  adf->add_option("--column", column, "Channel to test (close, sma5, ...)");
  adf->add_option("--diff", diff, "0 tests levels, 1 tests returns")->check(CLI::IsMember({0, 1}));
  adf->add_option("--regression", regression, "c or ct");
  adf->add_option("--max-lags", max_lags, "Upper bound on augmentation lags");
  adf->add_option("--return-kind", return_kind, "simple or log (with --diff 1)");

  // slice
  auto* slice = app.add_subcommand("slice", "Cut lookback windows into a tensor blob");
  add_input(slice);
  Eigen::Index lookback = 20, stride = 1, horizon = 0;
  std::string channels = "close";
  slice->add_option("--lookback", lookback, "Timesteps per slice");
  slice->add_option("--stride", stride, "Bars between slice starts");
  slice->add_option("--channels", channels, "Comma-separated channel names");
  slice->add_option("--horizon", horizon, "Bars reserved after each slice for labels");

  // scale
  auto* scale = app.add_subcommand("scale", "Scale a tensor per slice");
  std::string tensor_path;
  std::string method = "minmax";
  std::string range = "0,1";
  scale->add_option("--tensor", tensor_path, "Tensor metadata JSON")->required();
  scale->add_option("--method", method, "minmax or standardize");
  scale->add_option("--range", range, "minmax feature range lo,hi");

  // label
  auto* label = app.add_subcommand("label", "Compute labels at slice ends");
  add_input(label);
  std::string family = "nbar_updown";
  std::string qclass = "0.6,0.4";
  std::string trend_method = "regression";
  Eigen::Index ma_period = 20;
  std::optional<double> threshold;
  Eigen::Index label_horizon = 1;
  label->add_option("--family", family, "Label family");
  label->add_option("--horizon", label_horizon, "Bars after the slice end");
  label->add_option("--lookback", lookback, "Slice lookback");
  label->add_option("--stride", stride, "Slice stride");
  label->add_option("--qclass", qclass, "up_min,down_max");
  label->add_option("--ma-period", ma_period, "Moving-average period");
  label->add_option("--trend-method", trend_method, "regression or ma_fraction");
  label->add_option("--threshold", threshold, "Trend direction threshold");

  // split
  auto* split = app.add_subcommand("split", "Plan train/val/test sets and audit leakage");
  std::optional<Eigen::Index> count;
  std::string fractions = "0.8,0.2,0.0";
  std::string embargo = "auto";
  bool anti_pattern = false;
  Eigen::Index split_horizon = 1;
  std::uint64_t split_seed = 42;
  auto* count_opt = split->add_option("--count", count, "Slice count");
  split->add_option("--tensor", tensor_path, "Tensor metadata JSON (slice count and stride)")->excludes(count_opt);
  split->add_option("--lookback", lookback, "Slice lookback");
  split->add_option("--stride", stride, "Slice stride");
  split->add_option("--horizon", split_horizon, "Label horizon");
  split->add_option("--fractions", fractions, "train,val,test");
  split->add_option("--seed", split_seed, "Shuffle seed");
  split->add_option("--embargo", embargo, "auto or a slice count");
  split->add_flag("--anti-pattern", anti_pattern, "Shuffle before splitting (leaky, for demonstration)");

  // probe
  auto* probe = app.add_subcommand("probe", "Learnability probe on close-only slices");
  add_input(probe);
  std::string scaler = "standardize";
  std::string condition = "all";
  LearnabilityOptions lopt;
  bool no_bias = false;
  probe->add_option("--scaler", scaler, "minmax, standardize or none");
  probe->add_option("--condition", condition, "c5, ema5, hc10 or all");
  probe->add_option("--epochs", lopt.train.epochs, "Training epochs");
  probe->add_option("--seed", lopt.train.seed, "Training seed");
  probe->add_option("--hidden", lopt.hidden_units, "Hidden units");
  probe->add_option("--lookback", lopt.lookback, "Slice lookback");
  probe->add_option("--batch-size", lopt.train.batch_size, "Mini-batch size");
  probe->add_option("--learning-rate", lopt.train.learning_rate, "Adam step size");
  probe->add_option("--dropout", lopt.train.dropout, "Hidden dropout rate");
  probe->add_flag("--no-bias", no_bias, "Drop bias terms");

  // run
  auto* run = app.add_subcommand("run", "Run the full pipeline from a config file");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Print a dataset manifest");
  std::string manifest_path;
  inspect->add_option("manifest", manifest_path, "manifest.json or its directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (ingest->parsed()) {
      const BarSeries s = load_csv(input, schema);
      json summary = series_summary(s);
      summary["sha256"] = file_sha256(input);
      if (export_returns) {
        const ReturnSeries r = to_returns(s, parse_return_kind(return_kind));
        const auto path = out_dir(g) / "returns.csv";
        std::ofstream out(path);
        out.precision(17);
        out << "index,return\n";
        for (Eigen::Index i = 0; i < r.values.size(); ++i) out << i + 1 << ',' << r.values[i] << '\n';
        summary["returns_csv"] = path.string();
      }
      if (g.json) {
        std::cout << summary.dump(2) << '\n';
      } else {
        std::cout << "symbol   " << s.symbol() << "\nbars     " << s.size() << "\nfirst    "
                  << summary["first"].get<std::string>() << "\nlast     " << summary["last"].get<std::string>()
                  << "\nsha256   " << summary["sha256"].get<std::string>() << '\n';
      }
    } else if (adf->parsed()) {
      const BarSeries s = load_csv(input, schema);
      Eigen::VectorXd x = build_channel(s, column);
      Eigen::Index first = 0;
      while (first < x.size() && !std::isfinite(x[first])) ++first;
      x = x.tail(x.size() - first).eval();
      if (diff == 1) x = to_returns(x, parse_return_kind(return_kind)).values;
      const AdfReport report = adf_test(x, parse_regression(regression), max_lags);
      if (g.json) {
        std::cout << to_json(report).dump(2) << '\n';
      } else {
        std::cout << format_adf(report);
      }
    } else if (slice->parsed()) {
      const BarSeries s = load_csv(input, schema);
      SliceSpec spec;
      spec.lookback = lookback;
      spec.stride = stride;
      spec.label_horizon = horizon;
      spec.channels = parse_list<std::string>(channels, "channels");
      std::vector<Eigen::VectorXd> data;
      for (const auto& c : spec.channels) data.push_back(build_channel(s, c));
      spec.first_start = first_defined_start(data);
      const SliceTensor t = make_slices(data, spec);
      const auto files = write_tensor(out_dir(g), "tensor", t);
      json summary = {{"shape", {t.slice_count(), t.timesteps(), t.channel_count()}},
                      {"first_start", spec.first_start},
                      {"files", {files[0].string(), files[1].string()}}};
      std::cout << (g.json ? summary.dump(2) : "wrote " + files[1].string() + " shape (" +
                                                     std::to_string(t.slice_count()) + ", " +
                                                     std::to_string(t.timesteps()) + ", " +
                                                     std::to_string(t.channel_count()) + ")")
                << '\n';
    } else if (scale->parsed()) {
      const SliceTensor t = read_tensor(tensor_path);
      const auto r = parse_list<double>(range, "range");
      if (r.size() != 2 || !(r[0] < r[1])) throw ConfigError("--range: expected lo,hi with lo < hi");
      ScalerConfig cfg = default_scaler_config(t.channel_names(), parse_method(method));
      cfg.range_min = r[0];
      cfg.range_max = r[1];
      const SliceTensor scaled = scale_slices(t, cfg);
      const auto files = write_tensor(out_dir(g), "tensor_scaled", scaled);
      for (const auto& w : scaled.scaling()->warnings) std::cerr << "warning: " << w << '\n';
      std::cout << (g.json ? json{{"files", {files[0].string(), files[1].string()}}}.dump(2)
                           : "wrote " + files[1].string())
                << '\n';
    } else if (label->parsed()) {
      const BarSeries s = load_csv(input, schema);
      const LabelFamily f = parse_label_family(family);
      const Eigen::Index ma_need = f == LabelFamily::ma_updown ? ma_period - 1 : 0;
      const auto ends =
          slice_ends(static_cast<Eigen::Index>(s.size()), lookback, stride, label_horizon,
                     std::max<Eigen::Index>(0, ma_need - (lookback - 1)));
      const Eigen::VectorXd closes = s.closes();
      LabelVector labels;
      switch (f) {
        case LabelFamily::nbar_updown:
        case LabelFamily::nbar_change:
        case LabelFamily::nbar_logret: labels = label_nbar(closes, ends, label_horizon, f); break;
        case LabelFamily::ma_updown: labels = label_ma(closes, ends, label_horizon, ma_period); break;
        case LabelFamily::trend_strength:
        case LabelFamily::trend_direction:
          labels = label_trend(closes, ends, label_horizon, parse_trend_method(trend_method), f, ma_period, threshold);
          break;
        case LabelFamily::pctq: labels = label_pctq(s, ends, label_horizon); break;
        case LabelFamily::qclass: {
          const auto q = parse_list<double>(qclass, "qclass");
          if (q.size() != 2) throw ConfigError("--qclass: expected up_min,down_max");
          labels = label_qclass(label_pctq(s, ends, label_horizon), {q[0], q[1]});
          break;
        }
        case LabelFamily::probe_condition: throw ConfigError("--family: use the probe subcommand for probe conditions");
      }
      for (const auto& w : labels.warnings) std::cerr << "warning: " << w << '\n';
      const auto path = out_dir(g) / "labels.csv";
      write_labels_csv(path, labels);
      json summary = label_summary(labels);
      summary["file"] = path.string();
      std::cout << (g.json ? summary.dump(2) : "wrote " + path.string() + " (" + std::to_string(ends.size()) +
                                                     " labels)")
                << '\n';
    } else if (split->parsed()) {
      SliceSpec spec;
      spec.lookback = lookback;
      spec.stride = stride;
      spec.label_horizon = split_horizon;
      Eigen::Index k = count.value_or(0);
      if (!tensor_path.empty()) {
        const SliceTensor t = read_tensor(tensor_path);
        k = t.slice_count();
        spec.lookback = t.timesteps();
        spec.stride = t.stride();
      }
      if (k <= 0) throw ConfigError("split: give --count or --tensor");
      const std::uint64_t seed = g.seed.value_or(split_seed);
      const auto f = parse_fractions(fractions);
      SplitPlan plan;
      if (anti_pattern) {
        plan = shuffle_then_split(k, f, seed, spec);
      } else {
        Eigen::Index e = 0;
        if (embargo == "auto") {
          e = auto_embargo(spec);
        } else {
          const auto v = parse_list<long long>(embargo, "embargo");
          if (v.size() != 1 || v[0] < 0) throw ConfigError("--embargo: expected auto or a non-negative count");
          e = v[0];
        }
        plan = split_then_shuffle(k, f, seed, spec, e);
      }
      const json doc = to_json(plan);
      if (!g.output_dir.empty()) write_json_file(out_dir(g) / "split.json", doc);
      if (g.json) {
        std::cout << doc.dump(2) << '\n';
      } else {
        std::cout << "slices              " << k << "\ntrain               " << plan.train_order.size()
                  << "\nval                 " << plan.val_indices.size() << "\ntest                "
                  << plan.test_indices.size() << "\nembargo             " << plan.embargo
                  << "\nshuffled first      " << (plan.shuffled_before_split ? "yes" : "no")
                  << "\nmax cross overlap   " << plan.leakage.max_cross_overlap << "\nmean cross overlap  "
                  << plan.leakage.mean_cross_overlap << "\nviolating pairs     " << plan.leakage.violating_pairs
                  << "\nlabel overlap pairs " << plan.leakage.label_overlap_pairs << '\n';
      }
    } else if (probe->parsed()) {
      const BarSeries s = load_csv(input, schema);
      std::optional<ScaleMethod> m;
      if (scaler != "none") m = parse_method(scaler);
      lopt.use_bias = !no_bias;
      if (g.seed) lopt.train.seed = *g.seed;
      std::vector<ProbeCondition> wanted;
      if (condition == "all") {
        wanted = {ProbeCondition::close_above_close5, ProbeCondition::close_above_ema5,
                  ProbeCondition::close_above_hc10};
      } else {
        wanted = {parse_probe_condition(condition)};
      }
      const auto reports = run_learnability_suite(s.closes(), m, lopt);
      json doc = json::object();
      for (const auto c : wanted) {
        const ProbeReport& r = reports.at(c);
        doc[to_string(c)] = to_json(r);
        if (!g.json) std::cout << format_probe(r, std::string(to_string(c)) + " (" + scaler + ")") << '\n';
        if (!g.output_dir.empty()) write_losses_csv(out_dir(g) / ("probe_" + std::string(to_string(c)) + "_losses.csv"), r);
      }
      if (!g.output_dir.empty()) write_json_file(out_dir(g) / "probe_report.json", doc);
      if (g.json) std::cout << doc.dump(2) << '\n';
    } else if (run->parsed()) {
      if (g.config.empty()) throw ConfigError("run: --config is required");
      PipelineConfig cfg = load_config(g.config);
      if (!g.output_dir.empty()) cfg.output_dir = g.output_dir;
      if (g.seed) {
        cfg.split.seed = *g.seed;
        if (cfg.probe) cfg.probe->train.seed = *g.seed;
      }
      const DatasetManifest m = run_pipeline(cfg);
      if (g.json) {
        std::cout << m.document.dump(2) << '\n';
      } else {
        const auto& shape = m.document["tensor"]["shape"];
        std::cout << "tensor shape (" << shape[0] << ", " << shape[1] << ", " << shape[2] << ")\n";
        for (const auto& f : m.files) std::cout << "wrote " << f.string() << '\n';
        for (const auto& w : m.document["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
      }
    } else if (inspect->parsed()) {
      std::filesystem::path p = manifest_path;
      if (std::filesystem::is_directory(p)) p /= "manifest.json";
      std::ifstream in(p);
      if (!in) throw DataError("cannot open " + p.string());
      const json m = json::parse(in);
      if (g.json) {
        std::cout << m.dump(2) << '\n';
      } else {
        const auto& t = m.at("tensor");
        std::cout << "tool       " << m.at("tool").at("name").get<std::string>() << ' '
                  << m.at("tool").at("version").get<std::string>() << "\ninput      "
                  << m.at("input").at("path").get<std::string>() << "\nsha256     "
                  << m.at("input").at("sha256").get<std::string>() << "\nshape      " << t.at("shape").dump()
                  << "\nchannels   " << t.at("channels").dump() << "\nlabels     "
                  << m.at("labels").dump() << "\nsplit      " << m.at("split").dump() << "\nleakage    "
                  << m.at("leakage").dump() << "\nadf        " << m.at("adf").dump() << '\n';
        if (!m.at("probe").is_null()) std::cout << "accuracy   " << m.at("probe").at("accuracy").dump() << '\n';
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
