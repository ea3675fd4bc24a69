#pragma once

#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mcs/confidence_set.hpp"
#include "mcs/experiments.hpp"
#include "mcs/hypothesis.hpp"
#include "mcs/risk.hpp"

namespace mcs {

using Json = nlohmann::ordered_json;

inline std::string hex_digest(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Non-finite values become null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const TestOutcome& o) {
  Json j;
  j["method"] = o.method;
  j["statistic"] = number(o.statistic);
  j["threshold"] = number(o.threshold);
  j["reject"] = o.reject;
  j["decision"] = o.reject ? "reject" : "fail to reject";
  j["alpha"] = o.alpha;
  j["epsilon"] = o.epsilon;
  j["omega"] = o.omega ? Json(*o.omega) : Json(nullptr);
  j["table_digest"] = hex_digest(o.table_digest);
  Json details = Json::object();
  for (const auto& [k, v] : o.details) details[k] = number(v);
  j["details"] = std::move(details);
  return j;
}

inline Json to_json(const LossDiffTable& t) {
  Json j;
  j["tested"] = t.tested;
  j["comparator"] = t.comparator;
  j["loss"] = t.loss;
  j["plan_digest"] = hex_digest(t.plan_digest);
  j["table_digest"] = hex_digest(t.digest());
  j["k"] = t.k();
  Json rows = Json::array();
  for (const auto& r : t.rows) rows.push_back(r);
  j["rows"] = std::move(rows);
  return j;
}

inline LossDiffTable table_from_json(const Json& j) {
  LossDiffTable t;
  t.tested = j.at("tested").get<std::string>();
  t.comparator = j.at("comparator").get<std::string>();
  t.loss = j.at("loss").get<std::string>();
  t.plan_digest = std::stoull(j.at("plan_digest").get<std::string>(), nullptr, 16);
  for (const auto& r : j.at("rows")) t.rows.push_back(r.get<std::vector<double>>());
  return t;
}

inline Json to_json(const ConfidenceSetResult& r) {
  Json j;
  j["retained"] = r.retained;
  Json retained_names = Json::array();
  for (auto i : r.retained) retained_names.push_back(r.class_names[static_cast<std::size_t>(i)]);
  j["retained_names"] = std::move(retained_names);
  j["regime"] = std::string(to_string(r.regime));
  j["strategy"] = std::string(to_string(r.strategy));
  j["alpha"] = r.alpha;
  Json classes = Json::array();
  for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
    Json c;
    c["class"] = i;
    c["name"] = r.class_names[i];
    c["comparator"] = r.comparators[i] ? Json(*r.comparators[i]) : Json(nullptr);
    c["outcome"] = to_json(r.outcomes[i]);
    classes.push_back(std::move(c));
  }
  j["classes"] = std::move(classes);
  return j;
}

inline Json to_json(const RateEstimate& r) {
  return Json{{"successes", r.successes}, {"trials", r.trials}, {"rate", r.rate}, {"ci_low", r.ci_low}, {"ci_high", r.ci_high}};
}

// Fixed-width text table of (class, statistic, threshold, decision).
inline std::string render_table(const ConfidenceSetResult& r) {
  std::ostringstream os;
  std::size_t width = 5;
  for (const auto& n : r.class_names) width = std::max(width, n.size());
  auto fmt = [](double v) {
    std::ostringstream s;
    if (std::isfinite(v)) {
      s << std::setprecision(6) << v;
    } else {
      s << (v > 0 ? "inf" : "-inf");
    }
    return s.str();
  };
  os << std::left << std::setw(static_cast<int>(width) + 2) << "class" << std::setw(14) << "statistic"
     << std::setw(14) << "threshold" << "decision\n";
  for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
    const auto& o = r.outcomes[i];
    const bool reference = o.method == "reference";
    os << std::left << std::setw(static_cast<int>(width) + 2) << r.class_names[i]
       << std::setw(14) << (reference ? "-" : fmt(o.statistic)) << std::setw(14)
       << (reference ? "-" : fmt(o.threshold)) << (reference ? "Reference" : (o.reject ? "Reject" : "Fail to reject"))
       << '\n';
  }
  return os.str();
}

inline void write_power_csv(std::ostream& out, const std::vector<PowerRow>& rows) {
  out << "parameter,grid_value,method,rate,ci_low,ci_high,n_sims\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.parameter << ',' << r.grid_value << ',' << r.method << ',' << r.estimate.rate << ',' << r.estimate.ci_low
        << ',' << r.estimate.ci_high << ',' << r.estimate.trials << '\n';
  }
}

inline Json to_json(const std::vector<PowerRow>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    Json j = to_json(r.estimate);
    j["parameter"] = r.parameter;
    j["grid_value"] = r.grid_value;
    j["method"] = r.method;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline void write_feature_selection_csv(std::ostream& out, const std::vector<FeatureSelectionRow>& rows) {
  out << "nu,regime,metric,value,ci_low,ci_high,n_sims\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    const auto regime = to_string(r.regime);
    const auto n = r.miss_coverage.trials;
    out << r.nu << ',' << regime << ",miss_coverage," << r.miss_coverage.rate << ',' << r.miss_coverage.ci_low << ','
        << r.miss_coverage.ci_high << ',' << n << '\n';
    out << r.nu << ',' << regime << ",mean_size," << r.mean_size << ',' << r.size_ci_low << ',' << r.size_ci_high << ','
        << n << '\n';
    out << r.nu << ',' << regime << ",uniform_coverage," << r.uniform_coverage.rate << ','
        << r.uniform_coverage.ci_low << ',' << r.uniform_coverage.ci_high << ',' << n << '\n';
  }
}

inline Json to_json(const std::vector<FeatureSelectionRow>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back(Json{{"nu", r.nu},
                       {"regime", std::string(to_string(r.regime))},
                       {"miss_coverage", to_json(r.miss_coverage)},
                       {"mean_size", r.mean_size},
                       {"size_ci_low", r.size_ci_low},
                       {"size_ci_high", r.size_ci_high},
                       {"uniform_coverage", to_json(r.uniform_coverage)}});
  }
  return arr;
}

}  // namespace mcs
