#pragma once

// File formats: CSV tables, state sets as JSON, and the sidecar written next
// to an exported relaxation.

#include "aes/aesbound.hpp"
#include "aes/heuristic.hpp"
#include "aes/sdpa.hpp"
#include "aes/sets.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aes {

using json = nlohmann::json;

// Shortest-safe decimal text: 17 significant digits parse back to the same
// double.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_real(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  if (!detail::parse_number(text, v)) throw invalid_input("not a number: '" + text + "'");
  return v;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::runtime_error("error reading '" + path + "'");
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("error writing '" + path + "'");
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  friend bool operator==(const Table&, const Table&) = default;
};

namespace detail {

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline void csv_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out += ',';
    out += csv_cell(cells[k]);
  }
  out += '\n';
}

}  // namespace detail

// Comma separated, double-quote escaping, LF line ends.
inline std::string to_csv(const Table& t) {
  if (t.header.empty()) throw invalid_input("csv: table needs a header");
  std::string out;
  detail::csv_line(out, t.header);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != t.header.size()) {
      throw invalid_input("csv: row " + std::to_string(r + 1) + " has " + std::to_string(t.rows[r].size()) +
                          " cells, header has " + std::to_string(t.header.size()));
    }
    detail::csv_line(out, t.rows[r]);
  }
  return out;
}

inline Table parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string cell;
  bool quoted = false, in_record = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char ch = text[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          cell += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cell += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = in_record = true;
    } else if (ch == ',') {
      rec.push_back(std::move(cell));
      cell.clear();
      in_record = true;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && k + 1 < text.size() && text[k + 1] == '\n') ++k;
      rec.push_back(std::move(cell));
      cell.clear();
      records.push_back(std::move(rec));
      rec.clear();
      in_record = false;
    } else {
      cell += ch;
      in_record = true;
    }
  }
  if (quoted) throw invalid_input("csv: unterminated quoted field");
  if (in_record) {
    rec.push_back(std::move(cell));
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw invalid_input("csv: missing header");
  Table t;
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw invalid_input("csv: record " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                          " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

// param,value,converged,per_state_1..K,starts,seed. Failed points keep their
// row with nan values.
inline Table sweep_table(const std::vector<SweepRow>& rows, int k, int starts, std::uint64_t seed) {
  Table t;
  t.header = {"param", "value", "converged"};
  for (int i = 1; i <= k; ++i) t.header.push_back("per_state_" + std::to_string(i));
  t.header.push_back("starts");
  t.header.push_back("seed");
  for (const auto& r : rows) {
    std::vector<std::string> cells{format_real(r.param)};
    if (r.ok()) {
      cells.push_back(format_real(r.result.value));
      cells.push_back(r.result.converged ? "true" : "false");
      for (int i = 0; i < k; ++i) {
        cells.push_back(i < static_cast<int>(r.result.per_state.size())
                            ? format_real(r.result.per_state[static_cast<std::size_t>(i)])
                            : "nan");
      }
    } else {
      cells.push_back("nan");
      cells.push_back("false");
      for (int i = 0; i < k; ++i) cells.push_back("nan");
    }
    cells.push_back(std::to_string(starts));
    cells.push_back(std::to_string(seed));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

namespace detail {

inline json complex_json(complex z) { return json::array({z.real(), z.imag()}); }

inline complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw invalid_input("state set JSON: complex numbers are [re, im] pairs");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

// {"label", "d1", "d2", "pure", "states"}: pure states are amplitude lists,
// mixed states are row-major lists of rows.
inline json state_set_to_json(const StateSet& s) {
  json states = json::array();
  if (s.is_pure()) {
    for (const auto& p : s.pure) {
      json v = json::array();
      for (Eigen::Index i = 0; i < p.dim(); ++i) v.push_back(detail::complex_json(p[i]));
      states.push_back(std::move(v));
    }
  } else {
    for (const auto& m : s.mixed) {
      json rows = json::array();
      for (Eigen::Index i = 0; i < m.dim(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.dim(); ++j) row.push_back(detail::complex_json(m.matrix()(i, j)));
        rows.push_back(std::move(row));
      }
      states.push_back(std::move(rows));
    }
  }
  return {{"label", s.label}, {"d1", s.bp.d1}, {"d2", s.bp.d2}, {"pure", s.is_pure()}, {"states", states}};
}

inline StateSet state_set_from_json(const json& j) {
  try {
    const Bipartition bp(j.at("d1").get<int>(), j.at("d2").get<int>());
    const std::string label = j.value("label", std::string("set"));
    const bool pure = j.at("pure").get<bool>();
    const json& states = j.at("states");
    if (!states.is_array()) throw invalid_input("state set JSON: 'states' must be an array");
    if (pure) {
      std::vector<PureState> out;
      for (const auto& v : states) {
        ComplexVector a(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) a(static_cast<Eigen::Index>(i)) = detail::complex_from_json(v[i]);
        out.emplace_back(std::move(a));
      }
      return StateSet::from_pure(label, bp, std::move(out));
    }
    std::vector<DensityMatrix> out;
    for (const auto& rows : states) {
      const auto n = static_cast<Eigen::Index>(rows.size());
      ComplexMatrix m(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != n) throw invalid_input("state set JSON: density matrix is not square");
        for (Eigen::Index c = 0; c < n; ++c) m(i, c) = detail::complex_from_json(row[static_cast<std::size_t>(c)]);
      }
      out.emplace_back(std::move(m));
    }
    return StateSet::from_mixed(label, bp, std::move(out));
  } catch (const json::exception& e) {
    throw invalid_input(std::string("state set JSON: ") + e.what());
  }
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

// Records what is needed to interpret an exported relaxation: the config,
// the polynomial variable names, and the moment behind each SDPA variable
// (entry v is variable v + 1, listed as [[slot, power], ...]).
inline json relaxation_sidecar(const StateSet& s, const RelaxationConfig& cfg, const SymbolicSDP& sdp,
                               const Presolved& pre) {
  const VariableLayout lay(s.dim(), static_cast<int>(s.size()));
  json slots = json::array();
  for (int v = 0; v < lay.total(); ++v) slots.push_back(lay.name(v));
  json moments = json::array();
  for (const int k : pre.kept) {
    const Monomial& m = sdp.moments[static_cast<std::size_t>(k) + 1];
    json powers = json::array();
    for (int t = 0; t < m.degree();) {
      int p = 1;
      while (t + p < m.degree() && m.var(t + p) == m.var(t)) ++p;
      powers.push_back(json::array({m.var(t), p}));
      t += p;
    }
    moments.push_back(std::move(powers));
  }
  return {{"label", s.label},
          {"d1", s.bp.d1},
          {"d2", s.bp.d2},
          {"states", s.size()},
          {"config",
           {{"moment_deg_u", cfg.moment_deg_u},
            {"moment_deg_xi", cfg.moment_deg_xi},
            {"loc_deg_u", cfg.loc_deg_u},
            {"eq_deg", cfg.eq_deg},
            {"include_left_unitarity", cfg.include_left_unitarity},
            {"include_sigma_psd", cfg.include_sigma_psd}}},
          {"layout", {{"nvars", lay.total()}, {"slots", slots}}},
          {"sdp",
           {{"nvars", pre.problem.nvars},
            {"blocks", pre.problem.blocks.size()},
            {"equalities", pre.problem.equalities.size()},
            {"objective_offset", pre.problem.offset}}},
          {"moments", moments}};
}

inline RelaxationConfig config_from_sidecar(const json& j) {
  RelaxationConfig cfg;
  const json& c = j.at("config");
  cfg.moment_deg_u = c.at("moment_deg_u").get<int>();
  cfg.moment_deg_xi = c.at("moment_deg_xi").get<int>();
  cfg.loc_deg_u = c.at("loc_deg_u").get<int>();
  cfg.eq_deg = c.at("eq_deg").get<int>();
  cfg.include_left_unitarity = c.at("include_left_unitarity").get<bool>();
  cfg.include_sigma_psd = c.at("include_sigma_psd").get<bool>();
  return cfg;
}

// Relaxation lowered and presolved, plus its sidecar, ready for export.
struct ExportedRelaxation {
  NumericSDP problem;
  std::string sdpa;
  json sidecar;
};

inline ExportedRelaxation export_negativity_relaxation(const StateSet& s, const RelaxationConfig& cfg) {
  const SymbolicSDP sdp = build_negativity_relaxation(s, cfg);
  Presolved pre = presolve_free_rows(lower_numeric(sdp));
  ExportedRelaxation out;
  out.sidecar = relaxation_sidecar(s, cfg, sdp, pre);
  out.sdpa = export_sdpa(pre.problem);
  out.problem = std::move(pre.problem);
  return out;
}

}  // namespace aes
