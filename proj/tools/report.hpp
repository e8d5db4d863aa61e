// Copyright 2026 The measchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file report.hpp
 * JSON, CSV and text rendering of scenario runs, verification reports and
 * property-suite summaries. The JSON layout is described by the schemas in
 * schema/.
 */
#pragma once

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "measchain/property_suite.hpp"
#include "measchain/scenario.hpp"

namespace measchain::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "measchain";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

/// Rounds to 15 significant digits so that values such as 0.49999999999999994
/// are reported as 0.5.
inline double tidy(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return std::strtod(buf, nullptr);
}

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline Json header(const char* command) {
  return Json{{"tool", kToolName}, {"version", kToolVersion}, {"schema_version", kSchemaVersion}, {"command", command}};
}

inline Json matrix_json(const ComplexMatrix& m) {
  Json re = Json::array(), im = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json rr = Json::array(), ri = Json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) {
      rr.push_back(tidy(m(r, c).real()));
      ri.push_back(tidy(m(r, c).imag()));
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return Json{{"re", re}, {"im", im}};
}

inline Json to_json(const RepeatabilityReport& r, double tol) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    if (!row) {
      rows.push_back(nullptr);
      continue;
    }
    Json jr = Json::array();
    for (double p : *row) jr.push_back(tidy(p));
    rows.push_back(jr);
  }
  return Json{{"first", r.first},
              {"second", r.second},
              {"rows", rows},
              {"max_deviation", tidy(r.max_deviation)},
              {"is_identity", r.is_identity(tol)}};
}

inline Json to_json(const EquivalenceReport& r) {
  Json records = Json::array();
  for (const auto& rec : r.records)
    records.push_back(Json{{"query", rec.query},
                           {"chain", tidy(rec.chain_value)},
                           {"oracle", tidy(rec.oracle_value)},
                           {"deviation", tidy(rec.abs_deviation)}});
  Json j{{"scenario_id", r.scenario_id}, {"tolerance", r.tol}, {"max_deviation", tidy(r.max_deviation)}};
  j["reader_max_deviation"] = r.reader_max_deviation ? Json(tidy(*r.reader_max_deviation)) : Json(nullptr);
  j["pass"] = r.pass;
  j["records"] = records;
  return j;
}

inline Json to_json(const dsl::QueryResult& r, double tol) {
  const std::string kind = dsl::to_string(r.query.kind);
  Json j{{"query", r.text}, {"kind", kind}};
  if (r.error) {
    j["error"] = *r.error;
    return j;
  }
  if (const auto* m = std::get_if<dsl::MarginalValue>(&r.value)) {
    Json ps = Json::array();
    for (double p : m->probabilities) ps.push_back(tidy(p));
    j[kind] = Json{{"device", m->device}, {"probabilities", ps}};
  } else if (const auto* p = std::get_if<double>(&r.value)) {
    j[kind] = tidy(*p);
  } else if (const auto* d = std::get_if<DensityState>(&r.value)) {
    j[kind] = matrix_json(d->matrix());
  } else if (const auto* rep = std::get_if<RepeatabilityReport>(&r.value)) {
    j[kind] = to_json(*rep, tol);
  } else if (const auto* eq = std::get_if<EquivalenceReport>(&r.value)) {
    j[kind] = to_json(*eq);
  }
  return j;
}

inline Json run_json(const std::string& path, const dsl::ScenarioRun& run, double tol, double elapsed_ms) {
  Json j = header("run");
  j["scenario"] = path;
  j["tolerance"] = tol;
  j["elapsed_ms"] = elapsed_ms;
  Json results = Json::array();
  for (const auto& r : run.results) results.push_back(to_json(r, tol));
  j["results"] = results;
  return j;
}

// ---------------------------------------------------------------------------
// CSV: one row per scalar, fixed header.

inline constexpr const char* kCsvHeader = "query,kind,key,value,error";

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string run_csv(const dsl::ScenarioRun& run, double tol) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const auto& r : run.results) {
    const std::string prefix = csv_field(r.text) + "," + dsl::to_string(r.query.kind) + ",";
    auto row = [&](const std::string& key, const std::string& value) {
      out << prefix << csv_field(key) << "," << value << ",\n";
    };
    if (r.error) {
      out << prefix << ",," << csv_field(*r.error) << "\n";
    } else if (const auto* m = std::get_if<dsl::MarginalValue>(&r.value)) {
      for (std::size_t k = 0; k < m->probabilities.size(); ++k)
        row(m->device + "=" + std::to_string(k + 1), num(m->probabilities[k]));
    } else if (const auto* p = std::get_if<double>(&r.value)) {
      row("", num(*p));
    } else if (const auto* d = std::get_if<DensityState>(&r.value)) {
      const auto& mat = d->matrix();
      for (std::size_t i = 0; i < mat.rows(); ++i)
        for (std::size_t c = 0; c < mat.cols(); ++c) {
          const std::string ij = "[" + std::to_string(i + 1) + "," + std::to_string(c + 1) + "]";
          row("re" + ij, num(mat(i, c).real()));
          row("im" + ij, num(mat(i, c).imag()));
        }
    } else if (const auto* rep = std::get_if<RepeatabilityReport>(&r.value)) {
      for (std::size_t i = 0; i < rep->rows.size(); ++i)
        if (rep->rows[i])
          for (std::size_t k = 0; k < rep->rows[i]->size(); ++k)
            row("C[" + std::to_string(i + 1) + "," + std::to_string(k + 1) + "]", num((*rep->rows[i])[k]));
      row("max_deviation", num(rep->max_deviation));
      row("is_identity", rep->is_identity(tol) ? "true" : "false");
    } else if (const auto* eq = std::get_if<EquivalenceReport>(&r.value)) {
      for (const auto& rec : eq->records) row(rec.query, num(rec.chain_value));
      row("max_deviation", num(eq->max_deviation));
      row("pass", eq->pass ? "true" : "false");
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Text

inline std::string run_text(const std::string& path, const dsl::ScenarioRun& run, double tol) {
  std::ostringstream out;
  out << path << "\n";
  for (const auto& r : run.results) {
    out << "  " << r.text << "\n";
    if (r.error) {
      out << "    error: " << *r.error << "\n";
    } else if (const auto* m = std::get_if<dsl::MarginalValue>(&r.value)) {
      for (std::size_t k = 0; k < m->probabilities.size(); ++k)
        out << "    p(" << m->device << "=" << k + 1 << ") = " << num(m->probabilities[k]) << "\n";
    } else if (const auto* p = std::get_if<double>(&r.value)) {
      out << "    = " << num(*p) << "\n";
    } else if (const auto* d = std::get_if<DensityState>(&r.value)) {
      const auto& mat = d->matrix();
      for (std::size_t i = 0; i < mat.rows(); ++i) {
        out << "   ";
        for (std::size_t c = 0; c < mat.cols(); ++c) out << " " << dsl::format_complex({tidy(mat(i, c).real()), tidy(mat(i, c).imag())});
        out << "\n";
      }
    } else if (const auto* rep = std::get_if<RepeatabilityReport>(&r.value)) {
      for (std::size_t i = 0; i < rep->rows.size(); ++i) {
        out << "    " << rep->first << "=" << i + 1 << ":";
        if (!rep->rows[i]) {
          out << " (probability zero)\n";
          continue;
        }
        for (double p : *rep->rows[i]) out << " " << num(p);
        out << "\n";
      }
      out << "    identity: " << (rep->is_identity(tol) ? "yes" : "no") << " (max deviation " << num(rep->max_deviation)
          << ")\n";
    } else if (const auto* eq = std::get_if<EquivalenceReport>(&r.value)) {
      out << "    " << (eq->pass ? "pass" : "FAIL") << ": " << eq->records.size() << " comparisons, max deviation "
          << num(eq->max_deviation);
      if (eq->reader_max_deviation) out << ", reader max deviation " << num(*eq->reader_max_deviation);
      out << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Property suite

inline std::string reproducer_name(const dsl::PropertyFailure& f, std::uint64_t seed) {
  return "prop-seed" + std::to_string(seed) + "-trial" + std::to_string(f.trial) + ".scenario";
}

inline Json prop_json(const dsl::PropertySummary& s, const std::vector<std::string>& reproducers) {
  Json j = header("prop");
  j["seed"] = s.config.seed;
  j["trials"] = s.config.trials;
  j["max_dim"] = s.config.max_dim;
  j["max_depth"] = s.config.max_depth;
  j["tolerance"] = s.config.tol;
  j["passed"] = s.passed;
  j["failed"] = s.failed;
  j["max_deviation"] = tidy(s.max_deviation);
  Json checks = Json::object();
  for (const auto& [name, count] : s.checks) checks[name] = count;
  j["checks"] = checks;
  Json failures = Json::array();
  for (std::size_t i = 0; i < s.failures.size(); ++i) {
    const auto& f = s.failures[i];
    failures.push_back(Json{{"trial", f.trial}, {"check", f.check}, {"detail", f.detail}, {"reproducer", reproducers.at(i)}});
  }
  j["failures"] = failures;
  return j;
}

}  // namespace measchain::cli
