// Copyright 2026 The fairrobust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fairrobust_cli/run_config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace fairrobust::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw ConfigError("'" + key + "': expected " + expected + ", got '" + value + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    bad_value(key, v, "a non-negative integer");
  }
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(to_u64(key, v));
}

double to_double(const std::string& key, const std::string& v) {
  if (v.empty()) bad_value(key, v, "a number");
  char* end = nullptr;
  errno = 0;
  const double out = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(out)) {
    bad_value(key, v, "a finite number");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true or false");
}

// Escapes for delimiters such as a tab.
std::string unescape(const std::string& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == '\\' && i + 1 < v.size()) {
      const char c = v[++i];
      out += c == 't' ? '\t' : c == 'n' ? '\n' : c;
    } else {
      out += v[i];
    }
  }
  return out;
}

std::string escape(const std::string& v) {
  std::string out;
  for (char c : v) {
    if (c == '\t') {
      out += "\\t";
    } else if (c == '\\' || c == '#') {
      out += '\\';
      out += c;
    } else {
      out += c;
    }
  }
  return out;
}

std::vector<AttributeCut> to_cuts(const std::string& key, const std::string& v) {
  std::vector<AttributeCut> out;
  if (v.empty() || v == "none") return out;
  std::istringstream list(v);
  std::string item;
  while (std::getline(list, item, ',')) {
    std::vector<std::string> parts;
    std::istringstream fields(trim(item));
    std::string f;
    while (std::getline(fields, f, ':')) parts.push_back(f);
    if (parts.size() != 4 || parts[0].empty() || parts[2].empty() || parts[3].empty() ||
        parts[2] == parts[3]) {
      bad_value(key, item, "attribute:threshold:label_at_least:label_below");
    }
    out.push_back({parts[0], to_double(key, parts[1]), parts[2], parts[3]});
  }
  return out;
}

std::string cuts_text(const std::vector<AttributeCut>& cuts) {
  if (cuts.empty()) return "none";
  std::string out;
  for (const auto& c : cuts) {
    if (!out.empty()) out += ",";
    out += c.attribute + ":" + fmt(c.threshold) + ":" + c.label_at_least + ":" + c.label_below;
  }
  return out;
}

template <typename T>
std::optional<T> optional_of(const std::string& v, const std::function<T(const std::string&)>& f) {
  if (v.empty() || v == "none") return std::nullopt;
  return f(v);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
  const char* key;
  Setter set;
  Getter get;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto sz = [&](const char* key, auto member) {
      f.push_back({key,
                   [member](RunConfig& c, const std::string& k, const std::string& v) {
                     member(c) = to_size(k, v);
                   },
                   [member](const RunConfig& c) {
                     return std::to_string(member(const_cast<RunConfig&>(c)));
                   }});
    };
    auto dbl = [&](const char* key, auto member) {
      f.push_back({key,
                   [member](RunConfig& c, const std::string& k, const std::string& v) {
                     member(c) = to_double(k, v);
                   },
                   [member](const RunConfig& c) { return fmt(member(const_cast<RunConfig&>(c))); }});
    };
    auto str = [&](const char* key, auto member) {
      f.push_back({key,
                   [member](RunConfig& c, const std::string&, const std::string& v) {
                     member(c) = unescape(v);
                   },
                   [member](const RunConfig& c) {
                     return escape(member(const_cast<RunConfig&>(c)));
                   }});
    };
    auto ratio = [&](const char* key, auto member) {
      f.push_back({key,
                   [member](RunConfig& c, const std::string& k, const std::string& v) {
                     const auto n = to_u64(k, v);
                     if (n > 1000000) bad_value(k, v, "a ratio <= 1000000");
                     member(c) = static_cast<unsigned>(n);
                   },
                   [member](const RunConfig& c) {
                     return std::to_string(member(const_cast<RunConfig&>(c)));
                   }});
    };

    f.push_back({"seed",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.seed = to_u64(k, v);
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    f.push_back({"out",
                 [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; },
                 [](const RunConfig& c) { return c.out.string(); }});

    f.push_back({"data.source",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   if (v == "synthetic") {
                     c.data.synthetic = true;
                   } else if (v == "file") {
                     c.data.synthetic = false;
                   } else {
                     bad_value(k, v, "synthetic or file");
                   }
                 },
                 [](const RunConfig& c) {
                   return std::string(c.data.synthetic ? "synthetic" : "file");
                 }});
    f.push_back({"data.interactions",
                 [](RunConfig& c, const std::string&, const std::string& v) {
                   c.data.interactions = v;
                 },
                 [](const RunConfig& c) { return c.data.interactions.string(); }});
    str("data.delimiter", [](RunConfig& c) -> std::string& { return c.data.columns.delimiter; });
    f.push_back({"data.header",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.data.columns.header = to_bool(k, v);
                 },
                 [](const RunConfig& c) {
                   return std::string(c.data.columns.header ? "true" : "false");
                 }});
    str("data.user_column", [](RunConfig& c) -> std::string& { return c.data.columns.user; });
    str("data.item_column", [](RunConfig& c) -> std::string& { return c.data.columns.item; });
    str("data.timestamp_column",
        [](RunConfig& c) -> std::string& { return c.data.columns.timestamp; });
    f.push_back({"data.attributes",
                 [](RunConfig& c, const std::string&, const std::string& v) {
                   if (v.empty() || v == "none") {
                     c.data.attributes.reset();
                   } else {
                     c.data.attributes = v;
                   }
                 },
                 [](const RunConfig& c) {
                   return c.data.attributes ? c.data.attributes->string() : std::string("none");
                 }});
    str("data.attributes_delimiter",
        [](RunConfig& c) -> std::string& { return c.data.attributes_delimiter; });
    sz("data.min_interactions", [](RunConfig& c) -> std::size_t& { return c.data.min_interactions; });
    f.push_back({"data.binarize",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.data.cuts = to_cuts(k, v);
                 },
                 [](const RunConfig& c) { return cuts_text(c.data.cuts); }});

    sz("synth.users", [](RunConfig& c) -> std::size_t& { return c.data.synth.n_users; });
    sz("synth.items", [](RunConfig& c) -> std::size_t& { return c.data.synth.n_items; });
    dbl("synth.mean_interactions",
        [](RunConfig& c) -> double& { return c.data.synth.mean_interactions; });
    sz("synth.min_interactions",
       [](RunConfig& c) -> std::size_t& { return c.data.synth.min_interactions; });
    dbl("synth.popularity_skew",
        [](RunConfig& c) -> double& { return c.data.synth.popularity_skew; });
    dbl("synth.group_1_fraction",
        [](RunConfig& c) -> double& { return c.data.synth.group_1_fraction; });
    dbl("synth.group_skew", [](RunConfig& c) -> double& { return c.data.synth.group_skew; });
    sz("synth.clusters", [](RunConfig& c) -> std::size_t& { return c.data.synth.n_clusters; });
    dbl("synth.cluster_affinity",
        [](RunConfig& c) -> double& { return c.data.synth.cluster_affinity; });
    str("synth.attribute", [](RunConfig& c) -> std::string& { return c.data.synth.attribute; });
    str("synth.label_1", [](RunConfig& c) -> std::string& { return c.data.synth.label_1; });
    str("synth.label_2", [](RunConfig& c) -> std::string& { return c.data.synth.label_2; });

    ratio("split.train", [](RunConfig& c) -> unsigned& { return c.split.train; });
    ratio("split.validation", [](RunConfig& c) -> unsigned& { return c.split.validation; });
    ratio("split.test", [](RunConfig& c) -> unsigned& { return c.split.test; });

    sz("model.dim", [](RunConfig& c) -> std::size_t& { return c.model.dim; });
    sz("model.layers", [](RunConfig& c) -> std::size_t& { return c.model.layers; });
    dbl("model.learning_rate", [](RunConfig& c) -> double& { return c.model.learning_rate; });
    dbl("model.l2", [](RunConfig& c) -> double& { return c.model.l2; });
    sz("model.epochs", [](RunConfig& c) -> std::size_t& { return c.model.epochs; });
    sz("model.patience", [](RunConfig& c) -> std::size_t& { return c.model.patience; });
    sz("model.negatives", [](RunConfig& c) -> std::size_t& { return c.model.negatives; });
    sz("model.batch_size", [](RunConfig& c) -> std::size_t& { return c.model.batch_size; });
    sz("model.k_eval", [](RunConfig& c) -> std::size_t& { return c.model.k_eval; });

    f.push_back({"attack.op",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   try {
                     c.attack.operationalization = fairness_kind_from_string(v);
                   } catch (const Error&) {
                     bad_value(k, v, "one of cp, cs, pe, pv");
                   }
                 },
                 [](const RunConfig& c) {
                   return std::string(to_string(c.attack.operationalization));
                 }});
    str("attack.consumer_attribute",
        [](RunConfig& c) -> std::string& { return c.attack.consumer_attribute; });
    f.push_back({"attack.kind",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   try {
                     c.attack.kind = perturbation_kind_from_string(v);
                   } catch (const Error&) {
                     bad_value(k, v, "add or del");
                   }
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.attack.kind)); }});
    dbl("attack.lambda", [](RunConfig& c) -> double& { return c.attack.lambda; });
    f.push_back({"attack.optimizer",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   try {
                     c.attack.optimizer = optimizer_kind_from_string(v);
                   } catch (const Error&) {
                     bad_value(k, v, "adam or normalized_momentum");
                   }
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.attack.optimizer)); }});
    dbl("attack.step_size", [](RunConfig& c) -> double& { return c.attack.step_size; });
    dbl("attack.init_magnitude", [](RunConfig& c) -> double& { return c.attack.init_magnitude; });
    sz("attack.epochs", [](RunConfig& c) -> std::size_t& { return c.attack.max_epochs; });
    sz("attack.patience", [](RunConfig& c) -> std::size_t& { return c.attack.patience; });
    dbl("attack.min_delta", [](RunConfig& c) -> double& { return c.attack.min_delta; });
    f.push_back({"attack.gamma",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.attack.gamma = optional_of<std::size_t>(
                       v, [&](const std::string& s) { return to_size(k, s); });
                 },
                 [](const RunConfig& c) {
                   return c.attack.gamma ? std::to_string(*c.attack.gamma) : std::string("none");
                 }});
    f.push_back({"attack.epsilon",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.attack.epsilon = optional_of<double>(
                       v, [&](const std::string& s) { return to_double(k, s); });
                 },
                 [](const RunConfig& c) {
                   return c.attack.epsilon ? fmt(*c.attack.epsilon) : std::string("none");
                 }});
    f.push_back({"attack.candidate_cap",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.attack.candidate_cap = optional_of<std::size_t>(
                       v, [&](const std::string& s) { return to_size(k, s); });
                 },
                 [](const RunConfig& c) {
                   return c.attack.candidate_cap ? std::to_string(*c.attack.candidate_cap)
                                                 : std::string("none");
                 }});
    sz("attack.k_eval", [](RunConfig& c) -> std::size_t& { return c.attack.k_eval; });
    dbl("attack.tau", [](RunConfig& c) -> double& { return c.attack.tau; });
    return f;
  }();
  return table;
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(cfg, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

RunConfig parse_run_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    // A '#' inside a value is kept when escaped as "\#".
    if (hash != std::string::npos && (hash == 0 || line[hash - 1] != '\\')) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_setting(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

void validate(const RunConfig& cfg) {
  if (!cfg.data.synthetic) {
    if (cfg.data.interactions.empty()) {
      throw ConfigError("data.interactions must be set when data.source = file");
    }
    if (!std::filesystem::exists(cfg.data.interactions)) {
      throw ConfigError("data.interactions: no such file " + cfg.data.interactions.string());
    }
    if (cfg.data.columns.delimiter.empty()) throw ConfigError("data.delimiter is empty");
  }
  if (cfg.data.attributes && !std::filesystem::exists(*cfg.data.attributes)) {
    throw ConfigError("data.attributes: no such file " + cfg.data.attributes->string());
  }
  if (cfg.data.synthetic) {
    const auto& s = cfg.data.synth;
    if (s.n_users < 2 || s.n_items < 2) throw ConfigError("synth.users and synth.items must be >= 2");
    if (s.n_clusters == 0) throw ConfigError("synth.clusters must be >= 1");
    if (s.label_1 == s.label_2) throw ConfigError("synth.label_1 and synth.label_2 must differ");
  }
  if (cfg.split.train == 0 || cfg.split.train + cfg.split.validation + cfg.split.test == 0) {
    throw ConfigError("split.train must be >= 1");
  }
  if (cfg.model.dim == 0) throw ConfigError("model.dim must be >= 1");
  if (cfg.model.k_eval == 0) throw ConfigError("model.k_eval must be >= 1");
  if (cfg.model.batch_size == 0) throw ConfigError("model.batch_size must be >= 1");
  if (cfg.model.negatives == 0) throw ConfigError("model.negatives must be >= 1");
  if (!(cfg.model.learning_rate > 0.0)) throw ConfigError("model.learning_rate must be > 0");
  if (cfg.out.empty()) throw ConfigError("out must be set");
  validate(attack_config(cfg));
}

RecModelConfig model_config(const RunConfig& cfg) {
  RecModelConfig m = cfg.model;
  m.seed = cfg.seed;
  return m;
}

AttackConfig attack_config(const RunConfig& cfg) {
  AttackConfig a = cfg.attack;
  a.seed = cfg.seed;
  return a;
}

}  // namespace fairrobust::cli
