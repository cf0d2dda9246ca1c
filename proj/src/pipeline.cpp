#include "tslab/pipeline.hpp"

#include "tslab/adf.hpp"
#include "tslab/error.hpp"
#include "tslab/indicators.hpp"
#include "tslab/report_json.hpp"
#include "tslab/splitting.hpp"
#include "tslab/tensor_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace tslab {

using nlohmann::json;

namespace {

const std::vector<std::string> kBaseChannels = {"open", "high", "low", "close", "volume", "return", "logreturn"};
const std::set<std::string> kIndicatorNames = {"sma", "ema", "max", "min", "rsi"};

// Reads a config document while collecting every problem instead of stopping
// at the first one.
class Reader {
 public:
  std::vector<std::string> errors;

  void unknown_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) return;
    for (const auto& [key, _] : obj.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        errors.push_back(where + "." + key + ": unknown key");
      }
    }
  }

  const json* object(const json& parent, const char* key, const std::string& where, bool required = false) {
    if (!parent.contains(key)) {
      if (required) errors.push_back(where + "." + key + ": required");
      return nullptr;
    }
    const json& v = parent.at(key);
    if (!v.is_object()) {
      errors.push_back(where + "." + key + ": expected an object");
      return nullptr;
    }
    return &v;
  }

  template <typename T>
  void field(const json& obj, const char* key, const std::string& where, T& out, bool required = false) {
    if (!obj.contains(key) || obj.at(key).is_null()) {
      if (required) errors.push_back(where + "." + key + ": required");
      return;
    }
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception&) {
      errors.push_back(where + "." + key + ": wrong type");
    }
  }
};

ScaleMethod parse_scale_method(const std::string& s) {
  if (s == "minmax") return ScaleMethod::minmax;
  if (s == "standardize") return ScaleMethod::standardize;
  throw std::invalid_argument("unknown scaler method '" + s + "' (expected minmax or standardize)");
}

bool is_classifier(LabelFamily f) {
  return f == LabelFamily::nbar_updown || f == LabelFamily::ma_updown || f == LabelFamily::trend_direction ||
         f == LabelFamily::qclass;
}

struct Parsed {
  PipelineConfig config;
  std::vector<std::string> errors;
};

Parsed parse(const json& doc) {
  Parsed result;
  Reader r;
  PipelineConfig& c = result.config;
  if (!doc.is_object()) {
    result.errors.push_back("config: expected a JSON object");
    return result;
  }
  r.unknown_keys(doc, "config",
                 {"input", "indicators", "slice", "scaler", "label", "split", "balance", "probe", "export_flat_csv",
                  "output_dir"});

  if (const json* in = r.object(doc, "input", "config", true)) {
    r.unknown_keys(*in, "input", {"path", "schema"});
    std::string path;
    r.field(*in, "path", "input", path, true);
    c.input = path;
    if (const json* s = r.object(*in, "schema", "input")) {
      r.unknown_keys(*s, "input.schema", {"timestamp", "open", "high", "low", "close", "volume", "delimiter", "symbol"});
      r.field(*s, "timestamp", "input.schema", c.schema.timestamp);
      r.field(*s, "open", "input.schema", c.schema.open);
      r.field(*s, "high", "input.schema", c.schema.high);
      r.field(*s, "low", "input.schema", c.schema.low);
      r.field(*s, "close", "input.schema", c.schema.close);
      r.field(*s, "volume", "input.schema", c.schema.volume);
      r.field(*s, "symbol", "input.schema", c.schema.symbol);
      std::string delim = std::string(1, c.schema.delimiter);
      r.field(*s, "delimiter", "input.schema", delim);
      if (delim.size() != 1) {
        r.errors.push_back("input.schema.delimiter: must be a single character");
      } else {
        c.schema.delimiter = delim[0];
      }
      if (c.schema.timestamp.empty() || c.schema.close.empty()) {
        r.errors.push_back("input.schema: timestamp and close columns must be named");
      }
    }
  }

  if (doc.contains("indicators")) {
    if (!doc.at("indicators").is_array()) {
      r.errors.push_back("indicators: expected an array");
    } else {
      for (std::size_t i = 0; i < doc.at("indicators").size(); ++i) {
        const json& e = doc.at("indicators").at(i);
        const std::string where = "indicators[" + std::to_string(i) + "]";
        if (!e.is_object()) {
          r.errors.push_back(where + ": expected an object");
          continue;
        }
        r.unknown_keys(e, where, {"name", "period"});
        IndicatorSpec spec;
        r.field(e, "name", where, spec.name, true);
        r.field(e, "period", where, spec.period, true);
        if (!spec.name.empty() && !kIndicatorNames.count(spec.name)) {
          r.errors.push_back(where + ".name: unknown indicator '" + spec.name + "'");
        }
        if (spec.period < 1) r.errors.push_back(where + ".period: must be positive");
        c.indicators.push_back(spec);
      }
    }
  }

  std::optional<Eigen::Index> slice_horizon;
  if (const json* s = r.object(doc, "slice", "config", true)) {
    r.unknown_keys(*s, "slice", {"lookback", "stride", "channels", "label_horizon", "order"});
    r.field(*s, "lookback", "slice", c.slice.lookback);
    r.field(*s, "stride", "slice", c.slice.stride);
    r.field(*s, "channels", "slice", c.slice.channels, true);
    if (s->contains("label_horizon")) {
      Eigen::Index h = 0;
      r.field(*s, "label_horizon", "slice", h);
      slice_horizon = h;
    }
    std::string order = "slice_then_scale";
    r.field(*s, "order", "slice", order);
    if (order == "slice_then_scale") {
      c.slice_first = true;
    } else if (order == "scale_then_slice") {
      c.slice_first = false;
    } else {
      r.errors.push_back("slice.order: expected slice_then_scale or scale_then_slice");
    }
    if (c.slice.lookback <= 1) r.errors.push_back("slice.lookback: must be greater than 1");
    if (c.slice.stride < 1) r.errors.push_back("slice.stride: must be at least 1");
    if (c.slice.channels.empty()) r.errors.push_back("slice.channels: at least one channel required");
  }

  if (const json* s = r.object(doc, "scaler", "config", true)) {
    r.unknown_keys(*s, "scaler", {"method", "feature_range", "groups"});
    std::string method;
    r.field(*s, "method", "scaler", method, true);
    if (!method.empty()) {
      try {
        c.scaler.method = parse_scale_method(method);
      } catch (const std::invalid_argument& e) {
        r.errors.push_back(std::string("scaler.method: ") + e.what());
      }
    }
    std::vector<double> range{0.0, 1.0};
    r.field(*s, "feature_range", "scaler", range);
    if (range.size() != 2 || !(range[0] < range[1])) {
      r.errors.push_back("scaler.feature_range: expected [min, max] with min < max");
    } else {
      c.scaler.range_min = range[0];
      c.scaler.range_max = range[1];
    }
    if (const json* g = r.object(*s, "groups", "scaler")) {
      c.explicit_groups = true;
      r.unknown_keys(*g, "scaler.groups", {"overlaid", "bounded", "separate"});
      r.field(*g, "overlaid", "scaler.groups", c.scaler.overlaid);
      r.field(*g, "separate", "scaler.groups", c.scaler.separate);
      std::map<std::string, double> bounded;
      r.field(*g, "bounded", "scaler.groups", bounded);
      c.scaler.bounded.assign(bounded.begin(), bounded.end());
    }
  }

  if (const json* l = r.object(doc, "label", "config", true)) {
    r.unknown_keys(*l, "label", {"family", "horizon", "ma_period", "qclass", "trend_method", "direction_threshold"});
    std::string family;
    r.field(*l, "family", "label", family, true);
    if (!family.empty()) {
      try {
        c.label.family = parse_label_family(family);
      } catch (const std::invalid_argument& e) {
        r.errors.push_back(std::string("label.family: ") + e.what());
      }
    }
    r.field(*l, "horizon", "label", c.label.horizon);
    r.field(*l, "ma_period", "label", c.label.ma_period);
    std::vector<double> q{c.label.qclass.up_min, c.label.qclass.down_max};
    r.field(*l, "qclass", "label", q);
    if (q.size() != 2) {
      r.errors.push_back("label.qclass: expected [up_min, down_max]");
    } else {
      c.label.qclass = {q[0], q[1]};
      try {
        c.label.qclass.validate();
      } catch (const std::invalid_argument& e) {
        r.errors.push_back(std::string("label.qclass: ") + e.what());
      }
    }
    std::string trend = "regression";
    r.field(*l, "trend_method", "label", trend);
    try {
      c.label.trend_method = parse_trend_method(trend);
    } catch (const std::invalid_argument& e) {
      r.errors.push_back(std::string("label.trend_method: ") + e.what());
    }
    if (l->contains("direction_threshold") && !l->at("direction_threshold").is_null()) {
      double t = 0.0;
      r.field(*l, "direction_threshold", "label", t);
      c.label.direction_threshold = t;
    }
    if (c.label.horizon < 1) r.errors.push_back("label.horizon: must be at least 1");
    if (c.label.ma_period < 1) r.errors.push_back("label.ma_period: must be positive");
    if (c.label.family == LabelFamily::trend_strength || c.label.family == LabelFamily::trend_direction) {
      if (c.label.trend_method == TrendMethod::regression && c.label.horizon < 2) {
        r.errors.push_back("label.horizon: regression trend needs at least 2");
      }
    }
  }
  c.slice.label_horizon = slice_horizon.value_or(c.label.horizon);
  if (c.label.horizon > c.slice.label_horizon) {
    r.errors.push_back("label.horizon: " + std::to_string(c.label.horizon) + " exceeds slice.label_horizon " +
                       std::to_string(c.slice.label_horizon));
  }

  if (const json* s = r.object(doc, "split", "config")) {
    r.unknown_keys(*s, "split", {"fractions", "seed", "embargo", "anti_pattern"});
    std::vector<double> f{0.8, 0.2, 0.0};
    r.field(*s, "fractions", "split", f);
    if (f.size() != 3) {
      r.errors.push_back("split.fractions: expected [train, val, test]");
    } else {
      c.split.fractions = {f[0], f[1], f[2]};
      if (std::any_of(f.begin(), f.end(), [](double x) { return !(x >= 0.0); }) || !(f[0] > 0.0)) {
        r.errors.push_back("split.fractions: must be non-negative with a positive train share");
      }
      if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "split.fractions: must sum to 1 (got " << f[0] + f[1] + f[2] << ")";
        r.errors.push_back(msg.str());
      }
    }
    r.field(*s, "seed", "split", c.split.seed);
    r.field(*s, "anti_pattern", "split", c.split.anti_pattern);
    if (s->contains("embargo")) {
      const json& e = s->at("embargo");
      if (e.is_string() && e.get<std::string>() == "auto") {
        c.split.embargo.reset();
      } else if (e.is_number_integer() && e.get<long long>() >= 0) {
        c.split.embargo = e.get<Eigen::Index>();
      } else {
        r.errors.push_back("split.embargo: expected \"auto\" or a non-negative integer");
      }
    }
  }

  r.field(doc, "balance", "config", c.balance);
  r.field(doc, "export_flat_csv", "config", c.export_flat_csv);
  std::string out_dir = c.output_dir.string();
  r.field(doc, "output_dir", "config", out_dir);
  c.output_dir = out_dir;

  if (const json* p = r.object(doc, "probe", "config")) {
    r.unknown_keys(*p, "probe",
                   {"enabled", "hidden_units", "bias", "epochs", "batch_size", "learning_rate", "dropout", "seed"});
    bool enabled = true;
    r.field(*p, "enabled", "probe", enabled);
    ProbeConfig probe;
    r.field(*p, "hidden_units", "probe", probe.hidden_units);
    r.field(*p, "bias", "probe", probe.use_bias);
    r.field(*p, "epochs", "probe", probe.train.epochs);
    r.field(*p, "batch_size", "probe", probe.train.batch_size);
    r.field(*p, "learning_rate", "probe", probe.train.learning_rate);
    r.field(*p, "dropout", "probe", probe.train.dropout);
    r.field(*p, "seed", "probe", probe.train.seed);
    if (probe.hidden_units < 1) r.errors.push_back("probe.hidden_units: must be positive");
    if (probe.train.epochs < 1) r.errors.push_back("probe.epochs: must be at least 1");
    if (probe.train.batch_size < 1) r.errors.push_back("probe.batch_size: must be positive");
    if (!(probe.train.learning_rate > 0.0)) r.errors.push_back("probe.learning_rate: must be positive");
    if (!(probe.train.dropout >= 0.0 && probe.train.dropout < 1.0)) r.errors.push_back("probe.dropout: must be in [0, 1)");
    if (enabled) c.probe = probe;
  }

  const bool classifier = is_classifier(c.label.family);
  if (c.balance && !classifier) r.errors.push_back("balance: requires a classifier label family");
  if (c.probe && !classifier) r.errors.push_back("probe: requires a classifier label family");

  // Channel references.
  const auto channels = available_channels(c);
  for (const auto& ch : c.slice.channels) {
    if (std::find(channels.begin(), channels.end(), ch) == channels.end()) {
      r.errors.push_back("slice.channels: unknown channel '" + ch + "'");
    }
  }
  if (c.explicit_groups) {
    try {
      c.scaler.validate(c.slice.channels);
    } catch (const std::invalid_argument& e) {
      r.errors.push_back(std::string("scaler.groups: ") + e.what());
    }
  }
  result.errors = std::move(r.errors);
  return result;
}

// Runs one stage, re-raising failures with the stage name attached.
template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("[") + name + "] " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string("[") + name + "] " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("[") + name + "] " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("[") + name + "] " + e.what());
  }
}

Eigen::VectorXd aligned_returns(const Eigen::VectorXd& closes, ReturnKind kind) {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(closes.size(), kUndefined);
  if (closes.size() >= 2) out.tail(closes.size() - 1) = to_returns(closes, kind).values;
  return out;
}

// Smallest slice end index for which the configured label is computable.
Eigen::Index min_label_end(const LabelConfig& label) {
  if (label.family == LabelFamily::ma_updown) return label.ma_period - 1;
  if ((label.family == LabelFamily::trend_strength || label.family == LabelFamily::trend_direction) &&
      label.trend_method == TrendMethod::ma_fraction) {
    return std::max<Eigen::Index>(0, label.ma_period - 2);
  }
  return 0;
}

LabelVector make_labels(const LabelConfig& cfg, const BarSeries& series, const std::vector<Eigen::Index>& ends) {
  const Eigen::VectorXd closes = series.closes();
  switch (cfg.family) {
    case LabelFamily::nbar_updown:
    case LabelFamily::nbar_change:
    case LabelFamily::nbar_logret: return label_nbar(closes, ends, cfg.horizon, cfg.family);
    case LabelFamily::ma_updown: return label_ma(closes, ends, cfg.horizon, cfg.ma_period);
    case LabelFamily::trend_strength:
    case LabelFamily::trend_direction:
      return label_trend(closes, ends, cfg.horizon, cfg.trend_method, cfg.family, cfg.ma_period,
                         cfg.direction_threshold);
    case LabelFamily::pctq: return label_pctq(series, ends, cfg.horizon);
    case LabelFamily::qclass: return label_qclass(label_pctq(series, ends, cfg.horizon), cfg.qclass);
    case LabelFamily::probe_condition: break;
  }
  throw ConfigError("unsupported label family");
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::vector<std::string> validate_config(const json& document) { return parse(document).errors; }

std::vector<std::string> validate_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return {"cannot open " + path.string()};
  try {
    return validate_config(json::parse(in));
  } catch (const json::exception& e) {
    return {path.string() + ": " + e.what()};
  }
}

PipelineConfig config_from_json(const json& document) {
  Parsed parsed = parse(document);
  if (!parsed.errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : parsed.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return parsed.config;
}

json to_json(const PipelineConfig& c) {
  json indicators = json::array();
  for (const auto& i : c.indicators) indicators.push_back({{"name", i.name}, {"period", i.period}});
  json scaler = {{"method", to_string(c.scaler.method)}, {"feature_range", {c.scaler.range_min, c.scaler.range_max}}};
  if (c.explicit_groups) {
    json bounded = json::object();
    for (const auto& [name, bound] : c.scaler.bounded) bounded[name] = bound;
    scaler["groups"] = {{"overlaid", c.scaler.overlaid}, {"bounded", bounded}, {"separate", c.scaler.separate}};
  }
  json label = {{"family", to_string(c.label.family)},
                {"horizon", c.label.horizon},
                {"ma_period", c.label.ma_period},
                {"qclass", {c.label.qclass.up_min, c.label.qclass.down_max}},
                {"trend_method", to_string(c.label.trend_method)},
                {"direction_threshold", c.label.direction_threshold ? json(*c.label.direction_threshold) : json(nullptr)}};
  json doc = {
      {"input",
       {{"path", c.input.string()},
        {"schema",
         {{"timestamp", c.schema.timestamp},
          {"open", c.schema.open},
          {"high", c.schema.high},
          {"low", c.schema.low},
          {"close", c.schema.close},
          {"volume", c.schema.volume},
          {"delimiter", std::string(1, c.schema.delimiter)},
          {"symbol", c.schema.symbol}}}}},
      {"indicators", std::move(indicators)},
      {"slice",
       {{"lookback", c.slice.lookback},
        {"stride", c.slice.stride},
        {"channels", c.slice.channels},
        {"label_horizon", c.slice.label_horizon},
        {"order", c.slice_first ? "slice_then_scale" : "scale_then_slice"}}},
      {"scaler", std::move(scaler)},
      {"label", std::move(label)},
      {"split",
       {{"fractions", c.split.fractions},
        {"seed", c.split.seed},
        {"embargo", c.split.embargo ? json(*c.split.embargo) : json("auto")},
        {"anti_pattern", c.split.anti_pattern}}},
      {"balance", c.balance},
      {"export_flat_csv", c.export_flat_csv},
      {"output_dir", c.output_dir.string()},
  };
  if (c.probe) {
    doc["probe"] = {{"enabled", true},
                    {"hidden_units", c.probe->hidden_units},
                    {"bias", c.probe->use_bias},
                    {"epochs", c.probe->train.epochs},
                    {"batch_size", c.probe->train.batch_size},
                    {"learning_rate", c.probe->train.learning_rate},
                    {"dropout", c.probe->train.dropout},
                    {"seed", c.probe->train.seed}};
  }
  return doc;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  PipelineConfig config = config_from_json(doc);
  if (config.input.is_relative()) config.input = (path.parent_path() / config.input).lexically_normal();
  return config;
}

std::vector<std::string> available_channels(const PipelineConfig& config) {
  std::vector<std::string> out = kBaseChannels;
  for (const auto& i : config.indicators) out.push_back(i.channel());
  return out;
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

Eigen::VectorXd build_channel(const BarSeries& series, const std::string& name) {
  const FieldPresence fields = series.fields();
  if (name == "open" || name == "high" || name == "low") {
    if ((name == "open" && !fields.open) || (name != "open" && !fields.high_low)) {
      throw DataError("channel '" + name + "' is absent from the input");
    }
    return name == "open" ? series.opens() : name == "high" ? series.highs() : series.lows();
  }
  const Eigen::VectorXd closes = series.closes();
  if (name == "close") return closes;
  if (name == "volume") return series.volumes();
  if (name == "return") return aligned_returns(closes, ReturnKind::simple);
  if (name == "logreturn") return aligned_returns(closes, ReturnKind::log);
  const auto digit = name.find_first_of("0123456789");
  if (digit != std::string::npos && digit > 0 && kIndicatorNames.count(name.substr(0, digit)) &&
      name.find_first_not_of("0123456789", digit) == std::string::npos) {
    return compute_indicator(name.substr(0, digit), closes, std::stol(name.substr(digit))).values;
  }
  throw std::invalid_argument("unknown channel '" + name + "'");
}

DatasetManifest run_pipeline(const PipelineConfig& config) {
  if (auto errors = validate_config(to_json(config)); !errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  std::vector<std::string> warnings;

  const BarSeries series = stage("ingest", [&] { return load_csv(config.input, config.schema); });
  const std::string digest = stage("ingest", [&] { return file_sha256(config.input); });

  // Channels by name, aligned to bar index.
  const std::vector<Eigen::VectorXd> channels = stage("indicators", [&] {
    std::vector<Eigen::VectorXd> out;
    for (const auto& name : config.slice.channels) out.push_back(build_channel(series, name));
    return out;
  });

  SliceSpec spec = config.slice;
  spec.first_start = std::max(first_defined_start(channels),
                              std::max<Eigen::Index>(0, min_label_end(config.label) - (spec.lookback - 1)));

  ScalerConfig scaler = config.scaler;
  if (!config.explicit_groups) {
    scaler = default_scaler_config(spec.channels, config.scaler.method);
    scaler.range_min = config.scaler.range_min;
    scaler.range_max = config.scaler.range_max;
  }

  const SliceTensor tensor = stage("slice", [&] {
    if (config.slice_first) return scale_slices(make_slices(channels, spec), scaler);
    return scale_then_slice(channels, spec, scaler);
  });
  if (!config.slice_first) warnings.push_back("scale_then_slice: global scaling reads future bars");
  for (const auto& w : tensor.scaling()->warnings) warnings.push_back("scale: " + w);

  const LabelVector labels = stage("label", [&] { return make_labels(config.label, series, tensor.end_indices()); });
  for (const auto& w : labels.warnings) warnings.push_back("label: " + w);

  SplitPlan plan = stage("split", [&] {
    if (config.split.anti_pattern) {
      return shuffle_then_split(tensor.slice_count(), config.split.fractions, config.split.seed, spec);
    }
    const Eigen::Index embargo = config.split.embargo.value_or(auto_embargo(spec));
    SplitPlan p = split_then_shuffle(tensor.slice_count(), config.split.fractions, config.split.seed, spec, embargo);
    if (embargo > 0 && (p.leakage.max_cross_overlap > 0.0 || p.leakage.label_overlap_pairs > 0)) {
      throw ConfigError("embargo of " + std::to_string(embargo) +
                        " slices leaves cross-set window overlap; use \"auto\" (" +
                        std::to_string(auto_embargo(spec)) + ") or 0");
    }
    return p;
  });
  if (config.split.anti_pattern) warnings.push_back("split: shuffle_then_split leaks overlapping windows");

  const Eigen::Index train_before_balance = static_cast<Eigen::Index>(plan.train_order.size());
  if (config.balance) {
    plan.train_order = stage("balance", [&] { return downsample_majority(plan.train_order, labels, config.split.seed); });
  }

  json adf_summary = stage("adf", [&]() -> json {
    try {
      return to_json(adf_on_slices(tensor, 0, AdfRegression::constant));
    } catch (const std::exception& e) {
      return {{"error", e.what()}};
    }
  });

  std::optional<ProbeReport> probe_report;
  if (config.probe) {
    probe_report = stage("probe", [&] {
      const Eigen::MatrixXd data = flatten(tensor);
      ProbeModel model = ProbeModel::create(data.cols(), config.probe->hidden_units, labels.class_count,
                                            config.probe->use_bias, config.probe->train.seed + 1);
      return train(model, data, labels, plan, config.probe->train);
    });
  }

  std::vector<std::filesystem::path> written;
  try {
    std::filesystem::create_directories(config.output_dir);
    const auto tensor_files = write_tensor(config.output_dir, "tensor", tensor);
    written.insert(written.end(), tensor_files.begin(), tensor_files.end());
    if (config.export_flat_csv) {
      written.push_back(config.output_dir / "tensor_flat.csv");
      write_flat_csv(written.back(), tensor);
    }
    written.push_back(config.output_dir / "labels.csv");
    write_labels_csv(written.back(), labels);
    written.push_back(config.output_dir / "split.json");
    write_json(written.back(), to_json(plan));
    if (probe_report) {
      written.push_back(config.output_dir / "probe_report.json");
      write_json(written.back(), to_json(*probe_report));
      written.push_back(config.output_dir / "probe_losses.csv");
      write_losses_csv(written.back(), *probe_report);
    }

    json snapshot = to_json(config);
    snapshot.erase("output_dir");
    json files = json::array();
    for (const auto& f : written) files.push_back(f.filename().string());
    files.push_back("manifest.json");

    json manifest = {
        {"tool", {{"name", "tslab"}, {"version", kToolVersion}}},
        {"config", std::move(snapshot)},
        {"input",
         {{"path", config.input.string()},
          {"sha256", digest},
          {"bytes", std::filesystem::file_size(config.input)},
          {"symbol", series.symbol()},
          {"bars", series.size()},
          {"first", format_timestamp(series.bars().front().timestamp)},
          {"last", format_timestamp(series.bars().back().timestamp)}}},
        {"tensor",
         {{"shape", {tensor.slice_count(), tensor.timesteps(), tensor.channel_count()}},
          {"channels", tensor.channel_names()},
          {"first_start", spec.first_start},
          {"first_end_index", tensor.end_indices().front()},
          {"last_end_index", tensor.end_indices().back()},
          {"order", config.slice_first ? "slice_then_scale" : "scale_then_slice"},
          {"scaling", to_string(scaler.method)}}},
        {"labels", label_summary(labels)},
        {"split",
         {{"train_range", {plan.train_range.begin, plan.train_range.end}},
          {"val_range", {plan.val_range.begin, plan.val_range.end}},
          {"test_range", {plan.test_range.begin, plan.test_range.end}},
          {"embargo", plan.embargo},
          {"embargo_mode", config.split.embargo ? "fixed" : "auto"},
          {"seed", plan.seed},
          {"shuffled_before_split", plan.shuffled_before_split},
          {"train_size", train_before_balance},
          {"train_size_after_balance", plan.train_order.size()},
          {"val_size", plan.val_indices.size()},
          {"test_size", plan.test_indices.size()}}},
        {"leakage", to_json(plan.leakage)},
        {"adf", std::move(adf_summary)},
        {"probe", probe_report ? to_json(*probe_report) : json(nullptr)},
        {"warnings", warnings},
        {"files", std::move(files)},
    };
    written.push_back(config.output_dir / "manifest.json");
    write_json(written.back(), manifest);
    return {std::move(manifest), written};
  } catch (const std::exception& e) {
    for (const auto& f : written) {
      std::error_code ec;
      std::filesystem::remove(f, ec);
    }
    throw std::runtime_error(std::string("[write] ") + e.what());
  }
}

}  // namespace tslab
