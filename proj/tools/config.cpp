#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace smcf::cli {

namespace {

class SectionReader {
 public:
  SectionReader(const TomlTable& table, const std::string& name)
      : name_(name) {
    const auto it = table.find(name);
    section_ = (it == table.end()) ? nullptr : &it->second;
  }

  bool present() const { return section_ != nullptr; }

  const TomlValue* get(const std::string& key) {
    consumed_.insert(key);
    if (!section_) return nullptr;
    const auto it = section_->find(key);
    return it == section_->end() ? nullptr : &it->second;
  }

  void finish() const {
    if (!section_) return;
    for (const auto& [key, value] : *section_)
      if (!consumed_.count(key))
        throw ConfigError("config line " + std::to_string(value.line) +
                          ": unknown key '" + key + "' in [" + name_ + "]");
  }

 private:
  std::string name_;
  const TomlSection* section_;
  std::set<std::string> consumed_;
};

double positive_double(const TomlValue& v, const std::string& what) {
  const double x = v.as_double();
  if (!(x > 0.0)) throw ConfigError(what + " must be > 0");
  return x;
}

std::vector<int> int_list(const TomlValue& v, const std::string& what,
                          int min_value, bool ascending) {
  std::vector<int> out;
  for (const TomlValue& item : v.as_array()) {
    const std::int64_t x = item.as_int();
    if (x < min_value)
      throw ConfigError(what + " entries must be >= " +
                        std::to_string(min_value));
    if (x > 1 << 24) throw ConfigError(what + " entry is implausibly large");
    if (ascending && !out.empty() && x <= out.back())
      throw ConfigError(what + " must be strictly ascending");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

}  // namespace

std::vector<int> default_q_grid(int n) {
  std::vector<int> qs;
  for (int q = 1; q <= n; q *= 2) {
    qs.push_back(q);
    if (q > n / 2) break;
  }
  if (qs.back() != n) qs.push_back(n);
  return qs;
}

ExperimentConfig parse_config_text(const std::string& text) {
  const TomlTable table = parse_toml(text);
  static const std::set<std::string> known_sections{
      "model", "grid", "run", "output", "scenario"};
  for (const auto& [name, _] : table)
    if (!known_sections.count(name))
      throw ConfigError("unknown section [" + name + "]");

  ExperimentConfig cfg;

  SectionReader model(table, "model");
  if (!model.present()) throw ConfigError("missing [model] section");
  if (const TomlValue* v = model.get("epsilon")) {
    cfg.model.epsilon = v->as_double();
    if (!(cfg.model.epsilon > 0.0 && cfg.model.epsilon < 0.5))
      throw ConfigError("epsilon must lie in (0, 0.5)");
  } else {
    throw ConfigError("[model] needs an epsilon key");
  }
  if (const TomlValue* v = model.get("g0"))
    cfg.model.g0 = positive_double(*v, "g0");
  if (const TomlValue* v = model.get("g1"))
    cfg.model.g1 = positive_double(*v, "g1");
  if (const TomlValue* v = model.get("initial")) {
    const auto& items = v->as_array();
    if (items.size() != 2)
      throw ConfigError("initial must hold exactly two masses");
    double a = items[0].as_double();
    double b = items[1].as_double();
    if (!(a >= 0.0 && b >= 0.0 && a + b > 0.0))
      throw ConfigError("initial masses must be >= 0 and not all zero");
    cfg.model.initial = {a / (a + b), b / (a + b)};
  }
  if (const TomlValue* v = model.get("horizon")) {
    const std::int64_t h = v->as_int();
    if (h < 0 || h > 1 << 24) throw ConfigError("horizon out of range");
    cfg.model.horizon = static_cast<int>(h);
  }
  model.finish();

  SectionReader grid(table, "grid");
  if (const TomlValue* v = grid.get("N"))
    cfg.grid.n_list = int_list(*v, "N", 1, true);
  if (const TomlValue* v = grid.get("k"))
    cfg.grid.k_list = int_list(*v, "k", 0, true);
  if (const TomlValue* v = grid.get("q"))
    cfg.grid.q_list = int_list(*v, "q", 1, true);
  if (const TomlValue* v = grid.get("p")) {
    if (v->as_int() != 2)
      throw ConfigError("only the p = 2 norm is supported");
    cfg.grid.p_norm = 2;
  }
  if (const TomlValue* v = grid.get("schemes")) {
    cfg.grid.schemes.clear();
    for (const TomlValue& item : v->as_array()) {
      try {
        cfg.grid.schemes.push_back(parse_scheme(item.as_string()));
      } catch (const ConstructionError& e) {
        throw ConfigError(e.what());
      }
    }
    if (cfg.grid.schemes.empty())
      throw ConfigError("schemes must name at least one coupling scheme");
  }
  grid.finish();

  SectionReader run(table, "run");
  if (const TomlValue* v = run.get("replicates")) {
    const std::int64_t r = v->as_int();
    if (r < 1 || r > 100'000'000) throw ConfigError("replicates out of range");
    cfg.run.replicates = static_cast<int>(r);
  }
  if (const TomlValue* v = run.get("master_seed"))
    cfg.run.master_seed = v->as_uint();
  if (const TomlValue* v = run.get("threads")) {
    const std::int64_t t = v->as_int();
    if (t < 0 || t > 4096) throw ConfigError("threads out of range");
    cfg.run.threads = static_cast<int>(t);
  }
  if (const TomlValue* v = run.get("max_steps")) {
    const std::int64_t m = v->as_int();
    if (m < 1 || m > 1 << 24) throw ConfigError("max_steps out of range");
    cfg.run.max_steps = static_cast<int>(m);
  }
  run.finish();

  SectionReader output(table, "output");
  if (const TomlValue* v = output.get("directory"))
    cfg.output.directory = v->as_string();
  if (const TomlValue* v = output.get("csv"))
    cfg.output.csv_name = v->as_string();
  output.finish();

  SectionReader scenario(table, "scenario");
  cfg.scenario.present = scenario.present();
  if (const TomlValue* v = scenario.get("g0_delayed"))
    cfg.scenario.g0_delayed = positive_double(*v, "g0_delayed");
  if (const TomlValue* v = scenario.get("g1_delayed"))
    cfg.scenario.g1_delayed = positive_double(*v, "g1_delayed");
  if (const TomlValue* v = scenario.get("delays"))
    cfg.scenario.delays = int_list(*v, "delays", 1, true);
  scenario.finish();

  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace smcf::cli
