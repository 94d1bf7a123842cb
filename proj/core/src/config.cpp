#include "hifuse/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "hifuse/error.hpp"

extern char** environ;

namespace hifuse {
namespace {

using nlohmann::json;

const std::vector<std::string> kSections{"mel", "network", "train", "fusion", "labels", "synth", "metrics", "paths"};

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  require(j.is_object(), ErrorCode::kConfig, where + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    require(keys.contains(key), ErrorCode::kConfig, "unknown config key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, "config key '" + where + "." + key + "': " + e.what());
  }
}

// Integers arrive as JSON numbers; reject 3.5 where an int is expected.
void read_int(const json& j, const char* key, int& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  require(v.is_number_integer(), ErrorCode::kConfig, "config key '" + where + "." + key + "' must be an integer");
  out = v.get<int>();
}

json section(const json& root, const char* name) {
  return root.contains(name) ? root.at(name) : json::object();
}

}  // namespace

LabelSpec LabelConfig::train_spec(Eigen::Index length) const {
  return {t_healthy, t_faulty ? *t_faulty : static_cast<int>(length) - faulty_margin};
}

void validate(const RunConfig& config) {
  validate(config.train);
  validate(config.fusion);
  validate(config.synth.synth);
  require(config.network.k >= 1, ErrorCode::kConfig, "network.k must be positive");
  for (int width : config.network.hidden) require(width >= 1, ErrorCode::kConfig, "network.hidden widths must be positive");
  require(config.labels.t_healthy >= 1, ErrorCode::kConfig, "labels.t_healthy must be positive");
  require(config.labels.faulty_margin >= 1, ErrorCode::kConfig, "labels.faulty_margin must be positive");
  require(!config.labels.t_faulty || *config.labels.t_faulty > config.labels.t_healthy, ErrorCode::kConfig,
          "labels.t_faulty must exceed labels.t_healthy");
  require(config.synth.n_trajectories >= 1, ErrorCode::kConfig, "synth.n_trajectories must be positive");
  require(config.synth.lifetime_jitter >= 0.0 && config.synth.lifetime_jitter < 1.0, ErrorCode::kConfig,
          "synth.lifetime_jitter must lie in [0, 1)");
  require(config.metrics.align_window.begin >= 0 && config.metrics.align_window.end > config.metrics.align_window.begin,
          ErrorCode::kConfig, "metrics.align_window must be a non-empty [begin, end) range");
  require(std::isfinite(config.metrics.delay_threshold), ErrorCode::kConfig, "metrics.delay_threshold must be finite");
}

json to_json(const RunConfig& c) {
  const SynthConfig& s = c.synth.synth;
  json j;
  j["seed"] = c.seed;
  j["mel"] = {{"n_mels", c.mel.n_mels},
              {"window_s", c.mel.window_s},
              {"hop_s", c.mel.hop_s},
              {"sample_rate_hz", c.mel.sample_rate_hz}};
  j["network"] = {{"hidden", c.network.hidden}, {"k", c.network.k}};
  j["train"] = {{"lr", c.train.lr},
                {"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"mu", c.train.mu},
                {"nu", c.train.nu},
                {"lambda_div", c.train.lambda_div},
                {"eps_dist", c.train.eps_dist},
                {"eps_jitter", c.train.eps_jitter}};
  j["fusion"] = {{"beta", c.fusion.beta},
                 {"iters", c.fusion.iters},
                 {"tol", c.fusion.tol},
                 {"tau", c.fusion.tau},
                 {"isotonic", c.fusion.isotonic},
                 {"projection", std::string(to_string(c.fusion.projection))}};
  j["labels"] = {{"t_healthy", c.labels.t_healthy},
                 {"t_faulty", c.labels.t_faulty ? json(*c.labels.t_faulty) : json()},
                 {"faulty_margin", c.labels.faulty_margin}};
  j["synth"] = {{"length", s.length},
                {"num_features", s.num_features},
                {"n_informative", s.n_informative},
                {"phase_breaks", s.phase_breaks ? json::array({s.phase_breaks->first, s.phase_breaks->second}) : json()},
                {"noise_sigma", s.noise_sigma},
                {"distortion", std::string(to_string(s.distortion))},
                {"n_trajectories", c.synth.n_trajectories},
                {"lifetime_jitter", c.synth.lifetime_jitter}};
  j["metrics"] = {{"align_window", json::array({c.metrics.align_window.begin, c.metrics.align_window.end})},
                  {"delay_threshold", c.metrics.delay_threshold}};
  j["paths"] = {{"data_dir", c.paths.data_dir}, {"model", c.paths.model}, {"output_dir", c.paths.output_dir}};
  return j;
}

RunConfig run_config_from_json(const json& root) {
  require(root.is_object(), ErrorCode::kConfig, "config root must be an object");
  for (const auto& [key, value] : root.items()) {
    require(key == "seed" || std::find(kSections.begin(), kSections.end(), key) != kSections.end(),
            ErrorCode::kConfig, "unknown config key '" + key + "'");
  }
  RunConfig c;
  if (root.contains("seed")) {
    require(root.at("seed").is_number_unsigned(), ErrorCode::kConfig, "config key 'seed' must be a non-negative integer");
    c.seed = root.at("seed").get<std::uint64_t>();
  }

  const json mel = section(root, "mel");
  reject_unknown(mel, "mel", {"n_mels", "window_s", "hop_s", "sample_rate_hz"});
  read_int(mel, "n_mels", c.mel.n_mels, "mel");
  read(mel, "window_s", c.mel.window_s, "mel");
  read(mel, "hop_s", c.mel.hop_s, "mel");
  read_int(mel, "sample_rate_hz", c.mel.sample_rate_hz, "mel");

  const json net = section(root, "network");
  reject_unknown(net, "network", {"hidden", "k"});
  read(net, "hidden", c.network.hidden, "network");
  read_int(net, "k", c.network.k, "network");

  const json train = section(root, "train");
  reject_unknown(train, "train", {"lr", "epochs", "batch_size", "mu", "nu", "lambda_div", "eps_dist", "eps_jitter"});
  read(train, "lr", c.train.lr, "train");
  read_int(train, "epochs", c.train.epochs, "train");
  read_int(train, "batch_size", c.train.batch_size, "train");
  read(train, "mu", c.train.mu, "train");
  read(train, "nu", c.train.nu, "train");
  read(train, "lambda_div", c.train.lambda_div, "train");
  read(train, "eps_dist", c.train.eps_dist, "train");
  read(train, "eps_jitter", c.train.eps_jitter, "train");

  const json fusion = section(root, "fusion");
  reject_unknown(fusion, "fusion", {"beta", "iters", "tol", "tau", "isotonic", "projection"});
  read(fusion, "beta", c.fusion.beta, "fusion");
  read_int(fusion, "iters", c.fusion.iters, "fusion");
  read(fusion, "tol", c.fusion.tol, "fusion");
  read_int(fusion, "tau", c.fusion.tau, "fusion");
  read(fusion, "isotonic", c.fusion.isotonic, "fusion");
  if (fusion.contains("projection")) {
    std::string name;
    read(fusion, "projection", name, "fusion");
    c.fusion.projection = parse_projection_order(name);
  }

  const json labels = section(root, "labels");
  reject_unknown(labels, "labels", {"t_healthy", "t_faulty", "faulty_margin"});
  read_int(labels, "t_healthy", c.labels.t_healthy, "labels");
  if (labels.contains("t_faulty") && !labels.at("t_faulty").is_null()) {
    int t_faulty = 0;
    read_int(labels, "t_faulty", t_faulty, "labels");
    c.labels.t_faulty = t_faulty;
  }
  read_int(labels, "faulty_margin", c.labels.faulty_margin, "labels");

  const json synth = section(root, "synth");
  reject_unknown(synth, "synth", {"length", "num_features", "n_informative", "phase_breaks", "noise_sigma",
                                  "distortion", "n_trajectories", "lifetime_jitter"});
  SynthConfig& s = c.synth.synth;
  read_int(synth, "length", s.length, "synth");
  read_int(synth, "num_features", s.num_features, "synth");
  read_int(synth, "n_informative", s.n_informative, "synth");
  if (synth.contains("phase_breaks") && !synth.at("phase_breaks").is_null()) {
    std::vector<int> breaks;
    read(synth, "phase_breaks", breaks, "synth");
    require(breaks.size() == 2, ErrorCode::kConfig, "synth.phase_breaks must be [t1, t2]");
    s.phase_breaks = std::pair{breaks[0], breaks[1]};
  }
  read(synth, "noise_sigma", s.noise_sigma, "synth");
  if (synth.contains("distortion")) {
    std::string name;
    read(synth, "distortion", name, "synth");
    s.distortion = parse_distortion(name);
  }
  read_int(synth, "n_trajectories", c.synth.n_trajectories, "synth");
  read(synth, "lifetime_jitter", c.synth.lifetime_jitter, "synth");

  const json metrics = section(root, "metrics");
  reject_unknown(metrics, "metrics", {"align_window", "delay_threshold"});
  if (metrics.contains("align_window")) {
    std::vector<Eigen::Index> window;
    read(metrics, "align_window", window, "metrics");
    require(window.size() == 2, ErrorCode::kConfig, "metrics.align_window must be [begin, end)");
    c.metrics.align_window = {window[0], window[1]};
  }
  read(metrics, "delay_threshold", c.metrics.delay_threshold, "metrics");

  const json paths = section(root, "paths");
  reject_unknown(paths, "paths", {"data_dir", "model", "output_dir"});
  read(paths, "data_dir", c.paths.data_dir, "paths");
  read(paths, "model", c.paths.model, "paths");
  read(paths, "output_dir", c.paths.output_dir, "paths");

  c.train.seed = c.seed;
  s.seed = c.seed;
  try {
    validate(c);
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
  return c;
}

void apply_env_overrides(json& j, const std::map<std::string, std::string>& env) {
  constexpr std::string_view kPrefix = "HIFUSE_";
  for (const auto& [name, raw] : env) {
    if (!name.starts_with(kPrefix)) continue;
    std::string rest = name.substr(kPrefix.size());
    std::transform(rest.begin(), rest.end(), rest.begin(), [](unsigned char ch) { return std::tolower(ch); });
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;
    }
    if (rest == "seed") {
      j["seed"] = value;
      continue;
    }
    bool applied = false;
    for (const auto& sec : kSections) {
      if (rest.size() > sec.size() + 1 && rest.starts_with(sec) && rest[sec.size()] == '_') {
        j[sec][rest.substr(sec.size() + 1)] = value;
        applied = true;
        break;
      }
    }
    require(applied, ErrorCode::kConfig, "environment variable " + name + " does not name a config key");
  }
}

std::map<std::string, std::string> hifuse_environment() {
  std::map<std::string, std::string> env;
  for (char** entry = environ; entry != nullptr && *entry != nullptr; ++entry) {
    const std::string_view kv(*entry);
    if (!kv.starts_with("HIFUSE_")) continue;
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return env;
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const std::map<std::string, std::string>& env) {
  json j = json::object();
  if (path) {
    std::ifstream in(*path);
    require(static_cast<bool>(in), ErrorCode::kConfig, "cannot open config file " + path->string());
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::kConfig, "config file " + path->string() + " is not valid JSON: " + e.what());
    }
  }
  apply_env_overrides(j, env);
  return run_config_from_json(j);
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_resolved_config(const std::filesystem::path& dir, const RunConfig& config) {
  std::filesystem::create_directories(dir);
  const auto path = dir / "resolved_config.json";
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
  out << dump_json(to_json(config));
}

}  // namespace hifuse
