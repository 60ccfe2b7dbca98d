#pragma once

// SDPA sparse format (.dat-s) interchange.
//
// SDPA states the problem as  min c^T x  s.t.  sum_i x_i F_i - F_0 PSD,
// so x is our y and SDPA's F_0 is the negation of our constant term.
// Equalities a^T y = b go into a trailing diagonal block of size 2m as the
// pair a^T y - b >= 0, b - a^T y >= 0. Two header comments carry what SDPA
// cannot express:
//   * objective-offset <v>
//   * equality-block <blkno>

#include "aes/sdp.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace aes {

class sdpa_parse_error : public invalid_input {
 public:
  sdpa_parse_error(int line, const std::string& what)
      : invalid_input("SDPA line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct SdpaOptions {
  // When false, problems with equalities are rejected instead of encoded.
  bool encode_equalities = true;
};

namespace detail {

inline std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string_view> split_tokens(std::string_view line, std::string_view separators) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && separators.find(line[i]) != std::string_view::npos) ++i;
    std::size_t j = i;
    while (j < line.size() && separators.find(line[j]) == std::string_view::npos) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_number(std::string_view tok, double& v) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

inline bool parse_integer(std::string_view tok, long& v) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace detail

inline std::string export_sdpa(const NumericSDP& input, const SdpaOptions& opts = {}) {
  NumericSDP p = input;
  p.canonicalize();
  if (!p.equalities.empty() && !opts.encode_equalities) {
    throw invalid_input("export_sdpa: problem has equalities; eliminate them or enable paired-inequality encoding");
  }
  const bool eq_block = !p.equalities.empty();
  std::ostringstream os;
  if (p.offset != 0.0) os << "* objective-offset " << detail::format_g17(p.offset) << '\n';
  if (eq_block) os << "* equality-block " << p.blocks.size() + 1 << '\n';
  os << p.nvars << '\n';
  os << p.blocks.size() + (eq_block ? 1 : 0) << '\n';
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    if (b) os << ' ';
    os << (p.blocks[b].diagonal ? -p.blocks[b].size : p.blocks[b].size);
  }
  if (eq_block) os << (p.blocks.empty() ? "" : " ") << -2 * static_cast<long>(p.equalities.size());
  os << '\n';
  for (int v = 0; v < p.nvars; ++v) {
    if (v) os << ' ';
    os << detail::format_g17(p.c(v));
  }
  os << '\n';

  // (matno, blkno, i, j, value), all 1-based except matno.
  std::vector<std::tuple<int, int, int, int, double>> entries;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    for (const auto& e : p.blocks[b].entries) {
      entries.emplace_back(e.var + 1, static_cast<int>(b) + 1, e.i + 1, e.j + 1, e.var < 0 ? -e.value : e.value);
    }
  }
  if (eq_block) {
    const int blk = static_cast<int>(p.blocks.size()) + 1;
    for (std::size_t k = 0; k < p.equalities.size(); ++k) {
      const auto& row = p.equalities[k];
      const int pos = 2 * static_cast<int>(k) + 1;
      if (row.rhs != 0.0) {
        entries.emplace_back(0, blk, pos, pos, row.rhs);
        entries.emplace_back(0, blk, pos + 1, pos + 1, -row.rhs);
      }
      for (const auto& [v, a] : row.coeffs) {
        entries.emplace_back(v + 1, blk, pos, pos, a);
        entries.emplace_back(v + 1, blk, pos + 1, pos + 1, -a);
      }
    }
  }
  std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
    return std::tie(std::get<0>(x), std::get<1>(x), std::get<2>(x), std::get<3>(x)) <
           std::tie(std::get<0>(y), std::get<1>(y), std::get<2>(y), std::get<3>(y));
  });
  for (const auto& [m, b, i, j, v] : entries) {
    os << m << ' ' << b << ' ' << i << ' ' << j << ' ' << detail::format_g17(v) << '\n';
  }
  return os.str();
}

inline NumericSDP import_sdpa(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }
  double offset = 0.0;
  long eq_block = 0;
  std::size_t at = 0;
  auto blank = [](const std::string& s) { return s.find_first_not_of(" \t") == std::string::npos; };
  auto next_content = [&]() -> std::size_t {
    while (at < lines.size() && blank(lines[at])) ++at;
    if (at >= lines.size()) throw sdpa_parse_error(static_cast<int>(lines.size()), "unexpected end of input");
    return at++;
  };

  // Leading comments.
  while (at < lines.size() && (blank(lines[at]) || lines[at][0] == '*' || lines[at][0] == '"')) {
    const auto toks = detail::split_tokens(lines[at], " \t");
    const int ln = static_cast<int>(at) + 1;
    if (toks.size() >= 2 && toks[0] == "*" && toks[1] == "objective-offset") {
      if (toks.size() != 3 || !detail::parse_number(toks[2], offset)) throw sdpa_parse_error(ln, "bad objective-offset comment");
    } else if (toks.size() >= 2 && toks[0] == "*" && toks[1] == "equality-block") {
      if (toks.size() != 3 || !detail::parse_integer(toks[2], eq_block) || eq_block < 1) {
        throw sdpa_parse_error(ln, "bad equality-block comment");
      }
    }
    ++at;
  }

  const char* seps = " \t,{}()";
  auto header_int = [&](const char* what) {
    const std::size_t k = next_content();
    const auto toks = detail::split_tokens(lines[k], seps);
    long v = 0;
    if (toks.empty() || !detail::parse_integer(toks[0], v) || v < 0) {
      throw sdpa_parse_error(static_cast<int>(k) + 1, std::string("expected ") + what);
    }
    return v;
  };
  const long nvars = header_int("the number of variables");
  const long nblocks = header_int("the number of blocks");
  if (eq_block > nblocks) throw sdpa_parse_error(1, "equality-block refers to a missing block");

  std::vector<long> sizes;
  {
    const std::size_t k = next_content();
    for (const auto tok : detail::split_tokens(lines[k], seps)) {
      long v = 0;
      if (!detail::parse_integer(tok, v) || v == 0) throw sdpa_parse_error(static_cast<int>(k) + 1, "bad block size");
      sizes.push_back(v);
    }
    if (static_cast<long>(sizes.size()) != nblocks) {
      throw sdpa_parse_error(static_cast<int>(k) + 1, "expected " + std::to_string(nblocks) + " block sizes");
    }
  }

  NumericSDP p;
  p.nvars = static_cast<int>(nvars);
  p.offset = offset;
  p.c = RealVector::Zero(p.nvars);
  {
    std::size_t k = nvars > 0 ? next_content() : at;
    long filled = 0;
    while (filled < nvars) {
      for (const auto tok : detail::split_tokens(lines[k], seps)) {
        double v = 0.0;
        if (filled >= nvars || !detail::parse_number(tok, v)) {
          throw sdpa_parse_error(static_cast<int>(k) + 1, "bad objective vector");
        }
        p.c(filled++) = v;
      }
      if (filled < nvars) k = next_content();
    }
  }
  if (eq_block > 0 && (sizes[static_cast<std::size_t>(eq_block - 1)] > 0 || sizes[static_cast<std::size_t>(eq_block - 1)] % 2 != 0)) {
    throw sdpa_parse_error(1, "equality block must be diagonal with even size");
  }
  std::vector<int> block_slot(static_cast<std::size_t>(nblocks), -1);
  for (long b = 0; b < nblocks; ++b) {
    if (b + 1 == eq_block) continue;
    block_slot[static_cast<std::size_t>(b)] = static_cast<int>(p.blocks.size());
    LmiBlock blk;
    blk.size = static_cast<int>(std::abs(sizes[static_cast<std::size_t>(b)]));
    blk.diagonal = sizes[static_cast<std::size_t>(b)] < 0;
    p.blocks.push_back(std::move(blk));
  }
  const long m = eq_block > 0 ? -sizes[static_cast<std::size_t>(eq_block - 1)] / 2 : 0;
  // Upper and lower halves of each equality pair, checked for consistency.
  std::vector<std::map<int, double>> eq_hi(static_cast<std::size_t>(m)), eq_lo(static_cast<std::size_t>(m));

  for (; at < lines.size(); ++at) {
    if (blank(lines[at])) continue;
    const int ln = static_cast<int>(at) + 1;
    const auto toks = detail::split_tokens(lines[at], seps);
    long matno = 0, blkno = 0, i = 0, j = 0;
    double v = 0.0;
    if (toks.size() != 5 || !detail::parse_integer(toks[0], matno) || !detail::parse_integer(toks[1], blkno) ||
        !detail::parse_integer(toks[2], i) || !detail::parse_integer(toks[3], j) || !detail::parse_number(toks[4], v)) {
      throw sdpa_parse_error(ln, "expected 'matno blkno i j value'");
    }
    if (matno < 0 || matno > nvars) throw sdpa_parse_error(ln, "matrix number out of range");
    if (blkno < 1 || blkno > nblocks) throw sdpa_parse_error(ln, "block number out of range");
    const long size = std::abs(sizes[static_cast<std::size_t>(blkno - 1)]);
    if (i < 1 || j < 1 || i > size || j > size) throw sdpa_parse_error(ln, "entry index out of range");
    if (sizes[static_cast<std::size_t>(blkno - 1)] < 0 && i != j) throw sdpa_parse_error(ln, "off-diagonal entry in a diagonal block");
    const int var = static_cast<int>(matno) - 1;
    if (blkno == eq_block) {
      const long k = (i - 1) / 2;
      auto& half = (i - 1) % 2 == 0 ? eq_hi : eq_lo;
      half[static_cast<std::size_t>(k)][var] += (i - 1) % 2 == 0 ? v : -v;
      continue;
    }
    auto& blk = p.blocks[static_cast<std::size_t>(block_slot[static_cast<std::size_t>(blkno - 1)])];
    blk.entries.push_back({var, static_cast<int>(i) - 1, static_cast<int>(j) - 1, var < 0 ? -v : v});
  }
  for (long k = 0; k < m; ++k) {
    if (eq_hi[static_cast<std::size_t>(k)] != eq_lo[static_cast<std::size_t>(k)]) {
      throw sdpa_parse_error(1, "equality block rows " + std::to_string(2 * k + 1) + " and " + std::to_string(2 * k + 2) +
                                    " are not a negated pair");
    }
    LinearRow row;
    for (const auto& [var, a] : eq_hi[static_cast<std::size_t>(k)]) {
      if (var < 0) {
        row.rhs = a;
      } else {
        row.coeffs.emplace_back(var, a);
      }
    }
    p.equalities.push_back(std::move(row));
  }
  p.canonicalize();
  return p;
}

// An externally produced solution. Accepted layouts:
//  - SDPA output: "objValPrimal = v" and "xVec = {y_1, ..., y_n}";
//  - CSDP output: first line y, then "2 blkno i j value" rows of X
//    (matrix 1 rows, the slack, are ignored);
//  - a bare whitespace-separated y vector.
// X blocks beyond p.blocks (the encoded equality block) are dropped.
inline SDPSolution read_external_solution(const std::string& text, const NumericSDP& p) {
  SDPSolution sol;
  sol.status = SolveStatus::optimal;
  sol.message = "external";
  auto parse_vector = [&](std::string_view body, int line) {
    RealVector y(p.nvars);
    const auto toks = detail::split_tokens(body, " \t\r\n,{}");
    if (static_cast<int>(toks.size()) != p.nvars) {
      throw sdpa_parse_error(line, "expected " + std::to_string(p.nvars) + " solution values, found " +
                                       std::to_string(toks.size()));
    }
    for (int k = 0; k < p.nvars; ++k)
      if (!detail::parse_number(toks[static_cast<std::size_t>(k)], y(k))) throw sdpa_parse_error(line, "bad number");
    return y;
  };
  const auto xvec = text.find("xVec");
  if (xvec != std::string::npos) {
    const auto open = text.find('{', xvec);
    const auto close = text.find('}', open);
    const int line = static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(xvec), '\n')) + 1;
    if (open == std::string::npos || close == std::string::npos) throw sdpa_parse_error(line, "unterminated xVec");
    sol.y = parse_vector(std::string_view(text).substr(open + 1, close - open - 1), line);
    sol.primal_value = p.c.dot(sol.y) + p.offset;
    const auto pv = text.find("objValPrimal");
    if (pv != std::string::npos) {
      const auto eq = text.find('=', pv);
      const auto end = text.find('\n', eq);
      double v = 0.0;
      const auto toks = detail::split_tokens(std::string_view(text).substr(eq + 1, end - eq - 1), " \t");
      if (toks.size() == 1 && detail::parse_number(toks[0], v)) sol.primal_value = v + p.offset;
    }
    return sol;
  }
  std::istringstream is(text);
  std::string first;
  int ln = 0;
  while (std::getline(is, first)) {
    ++ln;
    if (first.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  sol.y = parse_vector(first, ln);
  sol.primal_value = p.c.dot(sol.y) + p.offset;
  std::vector<RealMatrix> xs;
  for (const auto& b : p.blocks) xs.push_back(RealMatrix::Zero(b.size, b.size));
  bool any_x = false;
  std::string line;
  while (std::getline(is, line)) {
    ++ln;
    const auto toks = detail::split_tokens(line, " \t\r");
    if (toks.empty()) continue;
    long matno = 0, blkno = 0, i = 0, j = 0;
    double v = 0.0;
    if (toks.size() != 5 || !detail::parse_integer(toks[0], matno) || !detail::parse_integer(toks[1], blkno) ||
        !detail::parse_integer(toks[2], i) || !detail::parse_integer(toks[3], j) || !detail::parse_number(toks[4], v)) {
      throw sdpa_parse_error(ln, "expected 'matno blkno i j value'");
    }
    if (matno != 2) continue;
    if (blkno < 1) throw sdpa_parse_error(ln, "block number out of range");
    if (blkno > static_cast<long>(p.blocks.size())) continue;
    auto& x = xs[static_cast<std::size_t>(blkno - 1)];
    if (i < 1 || j < 1 || i > x.rows() || j > x.rows()) throw sdpa_parse_error(ln, "entry index out of range");
    x(i - 1, j - 1) = v;
    x(j - 1, i - 1) = v;
    any_x = true;
  }
  if (any_x) sol.x = std::move(xs);
  return sol;
}

}  // namespace aes
