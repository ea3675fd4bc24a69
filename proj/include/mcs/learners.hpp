#pragma once

#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mcs/error.hpp"
#include "mcs/forest.hpp"
#include "mcs/linear.hpp"
#include "mcs/model.hpp"

namespace mcs {

// Declarative description of a fitting algorithm, as written in configs and
// on the command line:
//
//   ols | logistic | forest | const:<value>
//   followed by optional ":key=value" pairs, e.g.
//   ols:intercept=false   forest:trees=30:min_leaf=5   ols:features=0+2+4
struct LearnerSpec {
  enum class Kind { ols, logistic, forest, constant };

  Kind kind = Kind::ols;
  std::optional<IndexList> features;
  bool intercept = true;
  double ridge = 1e-6;
  ForestParams forest;
  double constant = 0.0;

  FitAlgorithm algorithm() const {
    switch (kind) {
      case Kind::ols: return ols_algorithm(features, OlsOptions{intercept});
      case Kind::logistic: {
        LogisticOptions o;
        o.ridge = ridge;
        o.intercept = intercept;
        return logistic_algorithm(features, o);
      }
      case Kind::forest: return forest_algorithm(forest, features);
      case Kind::constant: {
        std::ostringstream label;
        label << constant;
        return constant_algorithm(Model::make<ConstantModel>(constant), "constant(" + label.str() + ")");
      }
    }
    throw ConfigError("unknown learner kind");
  }

  // Whether the class this learner selects from can be enumerated.
  bool enumerable() const noexcept { return kind == Kind::constant; }

  std::string label() const { return algorithm().identity(); }
};

// Hyperparameter defaults shared by every learner unless a spec overrides them.
struct LearnerDefaults {
  std::optional<int> trees;
  std::optional<int> max_depth;
  std::optional<int> min_leaf;
  std::optional<double> feature_fraction;
  std::optional<double> ridge;
  std::optional<bool> intercept;
  std::optional<bool> bootstrap;
};

namespace detail {

inline double to_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || p != last) {
    throw ConfigError("invalid number '" + std::string(s) + "' for " + std::string(what));
  }
  return v;
}

inline int to_int(std::string_view s, std::string_view what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError("invalid integer '" + std::string(s) + "' for " + std::string(what));
  }
  return v;
}

inline bool to_bool(std::string_view s, std::string_view what) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(s) + "' for " + std::string(what));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline void apply_learner_option(LearnerSpec& spec, std::string_view key, std::string_view value) {
  if (key == "trees") {
    spec.forest.trees = detail::to_int(value, key);
  } else if (key == "max_depth") {
    spec.forest.max_depth = detail::to_int(value, key);
  } else if (key == "min_leaf") {
    spec.forest.min_leaf = detail::to_int(value, key);
  } else if (key == "feature_fraction") {
    spec.forest.feature_fraction = detail::to_double(value, key);
  } else if (key == "bootstrap") {
    spec.forest.bootstrap = detail::to_bool(value, key);
  } else if (key == "ridge") {
    spec.ridge = detail::to_double(value, key);
  } else if (key == "intercept") {
    spec.intercept = detail::to_bool(value, key);
  } else if (key == "features") {
    IndexList f;
    for (const auto& part : detail::split(value, '+')) f.push_back(detail::to_int(part, key));
    spec.features = std::move(f);
  } else {
    throw ConfigError("unknown learner option '" + std::string(key) + "'");
  }
}

inline LearnerSpec parse_learner(std::string_view text, const LearnerDefaults& defaults = {}) {
  const auto parts = detail::split(text, ':');
  LearnerSpec spec;
  if (defaults.trees) spec.forest.trees = *defaults.trees;
  if (defaults.max_depth) spec.forest.max_depth = *defaults.max_depth;
  if (defaults.min_leaf) spec.forest.min_leaf = *defaults.min_leaf;
  if (defaults.feature_fraction) spec.forest.feature_fraction = *defaults.feature_fraction;
  if (defaults.bootstrap) spec.forest.bootstrap = *defaults.bootstrap;
  if (defaults.ridge) spec.ridge = *defaults.ridge;
  if (defaults.intercept) spec.intercept = *defaults.intercept;

  const std::string& kind = parts.front();
  std::size_t first_option = 1;
  if (kind == "ols" || kind == "linear") {
    spec.kind = LearnerSpec::Kind::ols;
  } else if (kind == "logistic") {
    spec.kind = LearnerSpec::Kind::logistic;
  } else if (kind == "forest" || kind == "rf") {
    spec.kind = LearnerSpec::Kind::forest;
  } else if (kind == "const" || kind == "constant") {
    spec.kind = LearnerSpec::Kind::constant;
    if (parts.size() < 2) throw ConfigError("constant learner needs a value, e.g. const:0.5");
    spec.constant = detail::to_double(parts[1], "constant value");
    first_option = 2;
  } else {
    throw ConfigError("unknown learner '" + kind + "' (expected ols|logistic|forest|const:<v>)");
  }
  for (std::size_t i = first_option; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw ConfigError("learner option '" + parts[i] + "' is not key=value");
    apply_learner_option(spec, std::string_view(parts[i]).substr(0, eq), std::string_view(parts[i]).substr(eq + 1));
  }
  return spec;
}

}  // namespace mcs
