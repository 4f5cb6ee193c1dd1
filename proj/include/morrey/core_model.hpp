#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morrey/error.hpp"

namespace morrey {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Mode { Morrey, SmallMorrey };

inline const char* to_string(Mode mode) {
  return mode == Mode::Morrey ? "morrey" : "small";
}

/// Identifies M^p_q(R^n) or the small space m^p_q(R^n).
struct SpaceParams {
  int n = 1;
  double p = 1.0;
  double q = 2.0;
  Mode mode = Mode::Morrey;

  /// Validates 1 <= p <= q < inf and n >= 1.
  static SpaceParams make(int n, double p, double q, Mode mode) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "dimension n must be >= 1");
    if (!(p >= 1.0) || !(q >= p) || !std::isfinite(q))
      throw Error(ErrorCode::InvalidArgument, "require 1 <= p <= q < inf");
    return SpaceParams{n, p, q, mode};
  }

  /// Same as make() but additionally requires p < q.
  static SpaceParams make_strict(int n, double p, double q, Mode mode) {
    SpaceParams params = make(n, p, q, mode);
    if (!(p < q)) throw Error(ErrorCode::InvalidArgument, "require p < q");
    return params;
  }

  /// The exponent -n/q of the extremal power |x|^{-n/q}.
  double critical_exponent() const { return -static_cast<double>(n) / q; }

  bool admits_radius(double r) const {
    return r > 0.0 && (mode == Mode::Morrey || r < 1.0);
  }
};

/// coef * t^alpha for lo <= t < hi.
struct Piece {
  double lo = 0.0;
  double hi = kInf;
  double coef = 0.0;
  double alpha = 0.0;

  bool contains(double t) const { return lo <= t && t < hi; }
  friend bool operator==(const Piece&, const Piece&) = default;
};

/// Finite sum of radial power terms on disjoint annuli, kept in canonical form:
/// sorted, disjoint, no zero coefficients, adjacent identical terms merged.
class RadialFunction {
 public:
  RadialFunction() = default;

  /// Builds the canonical form of a possibly overlapping list of pieces.
  /// Overlapping pieces must share alpha so that coefficients add.
  static RadialFunction canonicalize(std::span<const Piece> raw) {
    std::vector<Piece> live;
    live.reserve(raw.size());
    for (const Piece& piece : raw) {
      if (!(piece.lo >= 0.0) || !(piece.hi > piece.lo) || std::isnan(piece.hi))
        throw Error(ErrorCode::InvalidArgument, "piece requires 0 <= lo < hi");
      if (!std::isfinite(piece.coef) || !std::isfinite(piece.alpha))
        throw Error(ErrorCode::InvalidArgument, "piece coefficient and exponent must be finite");
      if (piece.coef != 0.0) live.push_back(piece);
    }

    std::vector<double> cuts;
    cuts.reserve(2 * live.size());
    for (const Piece& piece : live) {
      cuts.push_back(piece.lo);
      cuts.push_back(piece.hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<Piece> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i];
      const double b = cuts[i + 1];
      bool covered = false;
      double coef = 0.0;
      double alpha = 0.0;
      for (const Piece& piece : live) {
        if (piece.lo <= a && b <= piece.hi) {
          if (covered && piece.alpha != alpha)
            throw Error(ErrorCode::MixedExponentOverlap,
                        "overlapping pieces on [" + std::to_string(a) + ", " + std::to_string(b) +
                            ") have different exponents");
          covered = true;
          alpha = piece.alpha;
          coef += piece.coef;
        }
      }
      if (!covered || coef == 0.0) continue;
      if (!out.empty() && out.back().hi == a && out.back().coef == coef && out.back().alpha == alpha) {
        out.back().hi = b;
      } else {
        out.push_back(Piece{a, b, coef, alpha});
      }
    }
    RadialFunction f;
    f.pieces_ = std::move(out);
    return f;
  }

  static RadialFunction canonicalize(std::initializer_list<Piece> raw) {
    return canonicalize(std::span<const Piece>(raw.begin(), raw.size()));
  }

  /// c * |x|^alpha on lo <= |x| < hi.
  static RadialFunction power(double coef, double alpha, double lo = 0.0, double hi = kInf) {
    return canonicalize({Piece{lo, hi, coef, alpha}});
  }

  const std::vector<Piece>& pieces() const { return pieces_; }
  bool is_zero() const { return pieces_.empty(); }

  /// Largest finite breakpoint, or 0 for functions without one.
  double last_finite_breakpoint() const {
    double last = 0.0;
    for (const Piece& piece : pieces_) {
      last = std::max(last, piece.lo);
      if (std::isfinite(piece.hi)) last = std::max(last, piece.hi);
    }
    return last;
  }

  double operator()(double t) const { return eval(t); }

  double eval(double t) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                               [](double value, const Piece& piece) { return value < piece.lo; });
    if (it == pieces_.begin()) return 0.0;
    const Piece& piece = *std::prev(it);
    return piece.contains(t) ? piece.coef * std::pow(t, piece.alpha) : 0.0;
  }

  friend bool operator==(const RadialFunction&, const RadialFunction&) = default;

 private:
  std::vector<Piece> pieces_;
};

inline RadialFunction scale(const RadialFunction& f, double c) {
  std::vector<Piece> pieces = f.pieces();
  for (Piece& piece : pieces) piece.coef *= c;
  return RadialFunction::canonicalize(pieces);
}

inline RadialFunction add(const RadialFunction& f, const RadialFunction& g) {
  std::vector<Piece> pieces = f.pieces();
  pieces.insert(pieces.end(), g.pieces().begin(), g.pieces().end());
  return RadialFunction::canonicalize(pieces);
}

inline RadialFunction subtract(const RadialFunction& f, const RadialFunction& g) {
  return add(f, scale(g, -1.0));
}

inline RadialFunction operator+(const RadialFunction& f, const RadialFunction& g) { return add(f, g); }
inline RadialFunction operator-(const RadialFunction& f, const RadialFunction& g) { return subtract(f, g); }
inline RadialFunction operator*(double c, const RadialFunction& f) { return scale(f, c); }

// ---------------------------------------------------------------------------
// Plain-text record: one piece per line, "lo hi coef alpha", "inf" for +inf.

inline std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

inline std::string serialize(const RadialFunction& f, std::string_view separator = "\n") {
  std::string out;
  for (std::size_t i = 0; i < f.pieces().size(); ++i) {
    const Piece& piece = f.pieces()[i];
    if (i > 0) out += separator;
    out += format_number(piece.lo) + " " + format_number(piece.hi) + " " + format_number(piece.coef) +
           " " + format_number(piece.alpha);
  }
  return out;
}

namespace detail {

inline double parse_field(std::string_view token, int line, int column) {
  if (token == "inf" || token == "+inf" || token == "Inf" || token == "infinity") return kInf;
  std::string text(token);
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || text.empty())
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " +
                                           std::to_string(column) + ": invalid number '" + text + "'");
  return value;
}

}  // namespace detail

/// Parses pieces separated by newlines or ';'. Blank records are ignored, so
/// an empty string is the zero function. Errors carry 1-based line/column.
inline RadialFunction parse_function(std::string_view text) {
  std::vector<Piece> pieces;
  int line = 1;
  std::size_t line_start = 0;
  std::size_t record_start = 0;
  int record_line = 1;

  auto flush = [&](std::size_t end) {
    std::vector<std::pair<std::string_view, int>> tokens;
    std::size_t i = record_start;
    while (i < end) {
      while (i < end && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      if (i >= end) break;
      const std::size_t begin = i;
      while (i < end && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      tokens.emplace_back(text.substr(begin, i - begin), static_cast<int>(begin - line_start) + 1);
    }
    if (tokens.empty()) return;
    if (tokens.size() != 4) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(record_line) + ", column " +
                                             std::to_string(tokens.front().second) +
                                             ": expected 4 fields 'lo hi coef alpha', got " +
                                             std::to_string(tokens.size()));
    }
    double fields[4];
    for (int k = 0; k < 4; ++k) fields[k] = detail::parse_field(tokens[k].first, record_line, tokens[k].second);
    pieces.push_back(Piece{fields[0], fields[1], fields[2], fields[3]});
  };

  for (std::size_t i = 0; i <= text.size(); ++i) {
    const bool at_end = i == text.size();
    const char c = at_end ? '\n' : text[i];
    if (c == ';' || c == '\n') {
      flush(i);
      record_start = i + 1;
      if (c == '\n') {
        ++line;
        line_start = i + 1;
      }
      record_line = line;
    }
  }
  try {
    return RadialFunction::canonicalize(pieces);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) throw Error(ErrorCode::ParseError, e.what());
    throw;
  }
}

}  // namespace morrey
