#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "diagram.hpp"
#include "linalg.hpp"

namespace csi {

// Finite combination of canonical diagrams with nonzero rational coefficients.
class DiagramVector {
 public:
  using Terms = std::map<Diagram, Rational>;

  DiagramVector() = default;

  static DiagramVector of(const Diagram& d, const Rational& c = 1) {
    DiagramVector v;
    v.add(d, c);
    return v;
  }

  // Canonicalizes d, folding the canonical sign into the coefficient.
  void add(const Diagram& d, const Rational& c) {
    auto cf = canonical_form(d);
    if (cf.sign == 0) return;
    add_canonical(cf.diagram, cf.sign > 0 ? Rational(c) : Rational(-c));
  }

  void add_canonical(const Diagram& d, const Rational& c) {
    if (sgn(c) == 0) return;
    auto [it, fresh] = terms_.try_emplace(d, c);
    if (!fresh) {
      it->second += c;
      if (sgn(it->second) == 0) terms_.erase(it);
    }
  }

  Rational coefficient(const Diagram& d) const {
    auto cf = canonical_form(d);
    if (cf.sign == 0) return 0;
    auto it = terms_.find(cf.diagram);
    if (it == terms_.end()) return 0;
    return cf.sign > 0 ? it->second : Rational(-it->second);
  }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  DiagramVector& operator+=(const DiagramVector& o) {
    for (auto& [d, c] : o.terms_) add_canonical(d, c);
    return *this;
  }
  DiagramVector& operator-=(const DiagramVector& o) {
    for (auto& [d, c] : o.terms_) add_canonical(d, -c);
    return *this;
  }
  DiagramVector& operator*=(const Rational& s) {
    if (sgn(s) == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [d, c] : terms_) c *= s;
    return *this;
  }
  friend DiagramVector operator+(DiagramVector a, const DiagramVector& b) { return a += b; }
  friend DiagramVector operator-(DiagramVector a, const DiagramVector& b) { return a -= b; }
  friend DiagramVector operator*(const Rational& s, DiagramVector a) { return a *= s; }
  bool operator==(const DiagramVector&) const = default;

  std::string to_string() const {
    std::ostringstream os;
    for (auto& [d, c] : terms_) os << c.get_str() << '\t' << encode(d) << '\n';
    return os.str();
  }

 private:
  Terms terms_;
};

// Sum of signed contractions over arcs and edges of every term.
inline DiagramVector coboundary(const Diagram& d) {
  DiagramVector out;
  for (int i = 1; i < d.p; ++i) {
    auto r = contract(d, Element::arc(i));
    if (!r.degenerate) out.add(r.diagram, r.sign);
  }
  for (int i = 0; i < static_cast<int>(d.edges.size()); ++i) {
    auto r = contract(d, Element::edge(i));
    if (!r.degenerate) out.add(r.diagram, r.sign);
  }
  return out;
}

inline DiagramVector coboundary(const DiagramVector& v) {
  DiagramVector out;
  for (auto& [d, c] : v.terms()) out += c * coboundary(d);
  return out;
}

// ---------------------------------------------------------------------------
// Relations

enum class RelationKind { one_term, four_term, stu, ihx, multiple_edge, relabel_sign };
enum class Family { chord, trivalent };

inline const char* to_string(RelationKind k) {
  switch (k) {
    case RelationKind::one_term: return "1T";
    case RelationKind::four_term: return "4T";
    case RelationKind::stu: return "STU";
    case RelationKind::ihx: return "IHX";
    case RelationKind::multiple_edge: return "multiple-edge";
    case RelationKind::relabel_sign: return "relabel-sign";
  }
  return "?";
}

inline const char* to_string(Family f) { return f == Family::chord ? "chord" : "trivalent"; }

inline Family parse_family(const std::string& s) {
  if (s == "chord") return Family::chord;
  if (s == "trivalent") return Family::trivalent;
  throw Error("unknown diagram family '" + s + "' (expected chord or trivalent)");
}

struct RelationSet {
  RelationKind kind = RelationKind::one_term;
  std::vector<DiagramVector> generators;
};

inline std::vector<Diagram> trivalent_basis(int k, Parity parity, bool chords_only = false) {
  EnumerationOptions o;
  o.trivalent_only = true;
  o.chords_only = chords_only;
  o.max_vertices = 2 * k;
  o.order = k;
  return enumerate_diagrams(0, parity, o);
}

// Degree-zero data of one order: the trivalent basis and the rows of the
// degree 0 -> 1 coboundary.  Row D' is sum_G delta[D',G] / aut(G) * G.
struct TrivalentData {
  int k = 0;
  Parity parity = Parity::odd;
  std::vector<Diagram> basis;
  std::map<Diagram, std::int64_t> aut;
  std::map<Diagram, DiagramVector> rows;
};

namespace detail {

inline TrivalentData build_trivalent_data(int k, Parity parity) {
  TrivalentData t;
  t.k = k;
  t.parity = parity;
  t.basis = trivalent_basis(k, parity);
  for (auto& g : t.basis) {
    auto a = aut_count(g);
    t.aut[g] = a;
    auto dg = coboundary(g);
    for (auto& [dp, c] : dg.terms()) t.rows[dp].add_canonical(g, Rational(c / a));
  }
  for (auto it = t.rows.begin(); it != t.rows.end();)
    it = it->second.is_zero() ? t.rows.erase(it) : std::next(it);
  return t;
}

}  // namespace detail

inline const TrivalentData& trivalent_data(int k, Parity parity) {
  static std::mutex mu;
  static std::map<std::pair<int, Parity>, std::unique_ptr<TrivalentData>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{k, parity}];
  if (!slot) slot = std::make_unique<TrivalentData>(detail::build_trivalent_data(k, parity));
  return *slot;
}

// Which relation a degree-one diagram cuts out, read from its 4-valent vertex.
inline RelationKind classify_row(const Diagram& dprime) {
  if (!dprime.loops.empty()) return RelationKind::one_term;
  for (int v = 1; v <= dprime.vertex_count(); ++v)
    if (valence(dprime, v) == 4) return dprime.is_segment(v) ? RelationKind::stu : RelationKind::ihx;
  throw Error("classify_row: no 4-valent vertex");
}

namespace detail {

// Chord diagram from endpoint positions; pairs hold positions in any order.
inline Diagram chord_diagram_from_positions(const std::vector<std::pair<double, double>>& chords,
                                            Parity parity) {
  std::vector<double> pts;
  for (auto [a, b] : chords) pts.push_back(a), pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  auto idx = [&](double x) {
    return static_cast<int>(std::lower_bound(pts.begin(), pts.end(), x) - pts.begin()) + 1;
  };
  Diagram d;
  d.parity = parity;
  d.p = static_cast<int>(pts.size());
  for (auto [a, b] : chords) d.chords.push_back(unordered({idx(a), idx(b)}));
  return d;
}

inline void perfect_matchings(std::vector<int> free_pts, std::vector<VertexPair>& cur,
                              const std::function<void(const std::vector<VertexPair>&)>& f) {
  if (free_pts.empty()) {
    f(cur);
    return;
  }
  int a = free_pts.front();
  for (std::size_t i = 1; i < free_pts.size(); ++i) {
    std::vector<int> rest;
    for (std::size_t j = 1; j < free_pts.size(); ++j)
      if (j != i) rest.push_back(free_pts[j]);
    cur.emplace_back(a, free_pts[i]);
    perfect_matchings(rest, cur, f);
    cur.pop_back();
  }
}

// Odd parity: a canonical chord diagram equals this sign times the classical
// unoriented diagram.  It is the sign of the endpoint word a1 b1 a2 b2 ...
// with chords (a_i < b_i) sorted by left end.
inline int classical_chord_sign(const Diagram& d) {
  if (d.parity == Parity::even) return 1;
  auto ch = d.chords;
  for (auto& c : ch) c = unordered(c);
  std::sort(ch.begin(), ch.end());
  std::vector<int> word;
  for (auto [a, b] : ch) word.push_back(a - 1), word.push_back(b - 1);
  return permutation_sign(word);
}

inline std::vector<DiagramVector> four_term_direct(int k, Parity parity) {
  if (parity == Parity::even)
    throw Error("the direct 4T form is defined for odd parity; use the STU-derived form");
  std::vector<DiagramVector> out;
  if (k < 2) return out;
  const int m = 2 * k - 2;
  std::vector<int> pts(static_cast<std::size_t>(m));
  std::iota(pts.begin(), pts.end(), 1);
  std::vector<VertexPair> cur;
  perfect_matchings(pts, cur, [&](const std::vector<VertexPair>& base) {
    std::vector<std::pair<double, double>> chords;
    for (auto [a, b] : base) chords.emplace_back(a, b);
    for (auto [u, v] : base)
      for (int g = 0; g <= m; ++g) {
        double w = g + 0.5;
        auto with = [&](double x) {
          auto c = chords;
          c.emplace_back(w, x);
          return chord_diagram_from_positions(c, parity);
        };
        // x hugs u or v on either side, always nearer to it than w is
        DiagramVector rel;
        auto term = [&](double x, int s) {
          auto d = with(x);
          rel.add(d, s * classical_chord_sign(d));
        };
        term(u + 0.25, 1);
        term(u - 0.25, -1);
        term(v + 0.25, 1);
        term(v - 0.25, -1);
        if (!rel.is_zero()) out.push_back(std::move(rel));
      }
  });
  return out;
}

}  // namespace detail

// One STU application at the segment-free edge `edge` of the trivalent
// diagram g: returns the row whose g-coefficient is r, normalized so that
// g = -(row - r g) / r.  Returns an empty optional-like zero vector when the
// row degenerates.
inline DiagramVector stu_row(const Diagram& g, int edge) {
  const auto& data = trivalent_data(order(g), g.parity);
  auto r = contract(g, Element::edge(edge));
  if (r.degenerate) return {};
  auto cf = canonical_form(r.diagram);
  if (cf.sign == 0) return {};
  auto it = data.rows.find(cf.diagram);
  if (it == data.rows.end()) return {};
  return it->second;
}

namespace detail {

inline std::vector<DiagramVector> four_term_from_stu(int k, Parity parity) {
  std::vector<DiagramVector> out;
  if (k < 2) return out;
  for (auto& y : trivalent_data(k, parity).basis) {
    if (y.q != 1) continue;
    std::vector<DiagramVector> expansions;
    for (int e = 0; e < static_cast<int>(y.edges.size()); ++e) {
      auto row = stu_row(y, e);
      auto ry = row.coefficient(y);
      if (sgn(ry) == 0) continue;
      DiagramVector rest = row;
      rest.add_canonical(y, -ry);
      expansions.push_back(Rational(Rational(-1) / ry) * rest);  // y = expansion
    }
    for (std::size_t i = 1; i < expansions.size(); ++i) {
      auto rel = expansions[i - 1] - expansions[i];
      if (!rel.is_zero()) out.push_back(std::move(rel));
    }
  }
  return out;
}

}  // namespace detail

enum class FourTermSource { direct, from_stu };

inline RelationSet relation_generators(RelationKind kind, int k, Parity parity,
                                       Family family = Family::trivalent,
                                       FourTermSource source = FourTermSource::direct) {
  RelationSet rs;
  rs.kind = kind;
  switch (kind) {
    case RelationKind::one_term:
      for (auto& d : trivalent_basis(k, parity, family == Family::chord))
        for (auto [a, b] : d.chords)
          if (b == a + 1) {
            rs.generators.push_back(DiagramVector::of(d));
            break;
          }
      break;
    case RelationKind::four_term:
      rs.generators = source == FourTermSource::direct ? detail::four_term_direct(k, parity)
                                                       : detail::four_term_from_stu(k, parity);
      break;
    case RelationKind::stu:
    case RelationKind::ihx:
      for (auto& [dp, row] : trivalent_data(k, parity).rows)
        if (classify_row(dp) == kind) rs.generators.push_back(row);
      break;
    case RelationKind::multiple_edge:
    case RelationKind::relabel_sign:
      // Folded into canonical_form: such identities vanish identically on
      // canonical representatives, so no generator survives.
      break;
  }
  return rs;
}

// Matrix with one row per generator and one column per space diagram.
inline Matrix relation_matrix(const std::vector<Diagram>& space,
                              const std::vector<RelationSet>& relations) {
  std::map<Diagram, std::size_t> col;
  for (std::size_t j = 0; j < space.size(); ++j) col[space[j]] = j;
  std::size_t n = 0;
  for (auto& rs : relations) n += rs.generators.size();
  Matrix m(n, space.size());
  std::size_t i = 0;
  for (auto& rs : relations)
    for (auto& g : rs.generators) {
      for (auto& [d, c] : g.terms()) {
        auto it = col.find(d);
        if (it == col.end())
          throw Error(std::string("relation ") + to_string(rs.kind) +
                      " involves a diagram outside the space: " + encode(d));
        m(i, it->second) = c;
      }
      ++i;
    }
  return m;
}

struct QuotientResult {
  std::size_t rank = 0;
  std::vector<Diagram> basis;
};

// Rank of span(space) / span(relations); the basis lists the diagrams on
// non-pivot columns of the reduced relation matrix.
inline QuotientResult quotient_rank(const std::vector<Diagram>& space,
                                    const std::vector<RelationSet>& relations) {
  auto m = relation_matrix(space, relations);
  std::size_t r = bareiss_rank(m);
  auto red = rref(m);
  if (red.pivot_columns.size() != r) throw Error("quotient_rank: elimination routes disagree");
  QuotientResult q;
  q.rank = space.size() - r;
  std::vector<char> piv(space.size(), 0);
  for (auto c : red.pivot_columns) piv[c] = 1;
  for (std::size_t j = 0; j < space.size(); ++j)
    if (!piv[j]) q.basis.push_back(space[j]);
  return q;
}

// ---------------------------------------------------------------------------
// STU reduction

// Chooses among candidate segment-free edge indices of a diagram; returns a
// preference order.
using StuSelector = std::function<std::vector<int>(const Diagram&, std::vector<int>)>;

inline StuSelector stu_first() {
  return [](const Diagram&, std::vector<int> c) { return c; };
}

inline StuSelector stu_last() {
  return [](const Diagram&, std::vector<int> c) {
    std::reverse(c.begin(), c.end());
    return c;
  };
}

inline DiagramVector stu_reduce(const Diagram& d, const StuSelector& pick = stu_first()) {
  auto cf = canonical_form(d);
  if (cf.sign == 0) return {};
  const Diagram& g = cf.diagram;
  for (int v = 1; v <= g.vertex_count(); ++v)
    if (valence(g, v) != 3) throw Error("stu_reduce: diagram is not trivalent");
  if (g.q == 0) return DiagramVector::of(g, cf.sign);

  std::vector<int> cand;
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e)
    if (g.is_segment(g.edges[e].first) || g.is_segment(g.edges[e].second)) cand.push_back(e);
  for (int e : pick(g, cand)) {
    auto row = stu_row(g, e);
    auto rg = row.coefficient(g);
    if (sgn(rg) == 0) continue;
    DiagramVector out;
    for (auto& [t, c] : row.terms()) {
      if (t == g) continue;
      if (t.q >= g.q) throw Error("stu_reduce: rewrite did not remove a free vertex");
      out += Rational(-c / rg) * stu_reduce(t, pick);
    }
    return Rational(cf.sign) * out;
  }
  throw Error("stu_reduce: no usable segment vertex for " + encode(g));
}

// ---------------------------------------------------------------------------
// Weight systems

struct WeightSystem {
  int k = 0;
  Family family = Family::trivalent;
  Parity parity = Parity::odd;
  std::map<Diagram, Rational> values;

  Rational operator()(const Diagram& d) const {
    auto cf = canonical_form(d);
    if (cf.sign == 0) return 0;
    auto it = values.find(cf.diagram);
    if (it == values.end()) return 0;
    return cf.sign > 0 ? it->second : Rational(-it->second);
  }
  Rational operator()(const DiagramVector& v) const {
    Rational s = 0;
    for (auto& [d, c] : v.terms()) {
      auto it = values.find(d);
      if (it != values.end()) s += c * it->second;
    }
    return s;
  }
};

inline std::vector<Diagram> family_space(int k, Family family, Parity parity) {
  return family == Family::chord ? trivalent_basis(k, parity, true)
                                 : trivalent_data(k, parity).basis;
}

inline std::vector<RelationSet> family_relations(int k, Family family, Parity parity) {
  if (family == Family::chord)
    return {relation_generators(RelationKind::one_term, k, parity, Family::chord),
            relation_generators(RelationKind::four_term, k, parity, Family::chord,
                                parity == Parity::odd ? FourTermSource::direct
                                                      : FourTermSource::from_stu)};
  return {relation_generators(RelationKind::one_term, k, parity),
          relation_generators(RelationKind::stu, k, parity),
          relation_generators(RelationKind::ihx, k, parity)};
}

inline const char* family_relation_names(Family f) {
  return f == Family::chord ? "1T+4T" : "1T+STU+IHX";
}

inline std::vector<WeightSystem> weight_system_space(int k, Family family,
                                                     Parity parity = Parity::odd) {
  auto space = family_space(k, family, parity);
  auto m = relation_matrix(space, family_relations(k, family, parity));
  std::vector<WeightSystem> out;
  for (auto& v : nullspace(m)) {
    WeightSystem w{k, family, parity, {}};
    for (std::size_t j = 0; j < space.size(); ++j)
      if (sgn(v[j]) != 0) w.values[space[j]] = v[j];
    out.push_back(std::move(w));
  }
  return out;
}

// Generators of the defining relations on which w does not vanish.
inline std::vector<DiagramVector> weight_system_violations(const WeightSystem& w) {
  std::vector<DiagramVector> bad;
  for (auto& rs : family_relations(w.k, w.family, w.parity))
    for (auto& g : rs.generators)
      if (sgn(w(g)) != 0) bad.push_back(g);
  return bad;
}

// Text form: one "coefficient<TAB>encoding" line per nonzero value.
inline std::string weight_system_text(const WeightSystem& w) {
  std::ostringstream os;
  for (auto& [d, c] : w.values)
    if (sgn(c) != 0) os << c.get_str() << '\t' << encode(d) << '\n';
  return os.str();
}

// Parses the text form; '#' starts a comment.  Diagrams are canonicalized
// (their sign folded into the value) and must share one order k.
inline WeightSystem parse_weight_system(const std::string& text, Family family = Family::trivalent) {
  WeightSystem w;
  w.family = family;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto sep = line.find_first_of(" \t", b);
    if (sep == std::string::npos) throw Error("weight system line " + std::to_string(lineno) + ": expected 'value encoding'");
    Rational c = parse_rational(line.substr(b, sep - b));
    Diagram d = decode(line.substr(line.find_first_not_of(" \t", sep)));
    if (degree(d) != 0) throw Error("weight system line " + std::to_string(lineno) + ": diagram must have degree 0");
    if (first) {
      w.k = order(d);
      w.parity = d.parity;
      first = false;
    } else if (order(d) != w.k || d.parity != w.parity) {
      throw Error("weight system line " + std::to_string(lineno) + ": all diagrams must share order and parity");
    }
    auto cf = canonical_form(d);
    if (cf.sign == 0) {
      if (sgn(c) != 0) throw Error("weight system line " + std::to_string(lineno) + ": diagram is zero by symmetry");
      continue;
    }
    Rational v = cf.sign > 0 ? c : Rational(-c);
    auto [it, fresh] = w.values.try_emplace(cf.diagram, v);
    if (!fresh) throw Error("weight system line " + std::to_string(lineno) + ": duplicate diagram");
  }
  if (first) throw Error("weight system: no entries");
  return w;
}

// CSV row "family,k,relations,rank" of the quotient dimension.
inline std::string dims_csv_row(Family family, int k, Parity parity = Parity::odd) {
  auto q = quotient_rank(family_space(k, family, parity), family_relations(k, family, parity));
  return std::string(to_string(family)) + "," + std::to_string(k) + "," +
         family_relation_names(family) + "," + std::to_string(q.rank);
}

// ---------------------------------------------------------------------------
// Cochain complex

struct ComplexSlice {
  Parity parity = Parity::odd;
  int degree = 0;
  std::optional<int> order;
  int max_vertices = 0;
  std::vector<Diagram> basis;     // degree d
  std::vector<Diagram> codomain;  // degree d+1
  SparseMatrix boundary;          // rows: codomain, columns: basis
};

inline ComplexSlice complex_slice(Parity parity, int degree, int max_vertices,
                                  std::optional<int> ord = std::nullopt) {
  ComplexSlice s;
  s.parity = parity;
  s.degree = degree;
  s.order = ord;
  s.max_vertices = max_vertices;
  EnumerationOptions o;
  o.max_vertices = max_vertices;
  o.order = ord;
  if (degree >= 0) s.basis = enumerate_diagrams(degree, parity, o);
  s.codomain = enumerate_diagrams(degree + 1, parity, o);
  std::map<Diagram, std::size_t> row;
  for (std::size_t i = 0; i < s.codomain.size(); ++i) row[s.codomain[i]] = i;
  s.boundary.rows = s.codomain.size();
  s.boundary.cols = s.basis.size();
  s.boundary.columns.resize(s.basis.size());
  for (std::size_t j = 0; j < s.basis.size(); ++j) {
    auto dg = coboundary(s.basis[j]);
    for (auto& [d, c] : dg.terms()) {
      auto it = row.find(d);
      if (it == row.end()) throw Error("complex_slice: coboundary left the codomain basis");
      s.boundary.columns[j].emplace_back(it->second, c);
    }
  }
  return s;
}

inline std::size_t slice_rank(const ComplexSlice& s) { return bareiss_rank(s.boundary.dense()); }

// dim ker(last) - rank(previous).  With one slice the previous map is zero.
inline std::int64_t cohomology_rank(const std::vector<ComplexSlice>& slices) {
  if (slices.empty() || slices.size() > 2) throw Error("cohomology_rank: expects one or two slices");
  const auto& cur = slices.back();
  std::int64_t ker = static_cast<std::int64_t>(cur.basis.size()) -
                     static_cast<std::int64_t>(slice_rank(cur));
  if (slices.size() == 1) return ker;
  const auto& prev = slices.front();
  if (prev.parity != cur.parity || prev.degree + 1 != cur.degree || prev.codomain != cur.basis)
    throw Error("cohomology_rank: slices are not consecutive (dimension mismatch)");
  return ker - static_cast<std::int64_t>(slice_rank(prev));
}

struct ComplexCheck {
  std::size_t checked = 0;
  std::vector<Diagram> failures;
};

// Verifies delta(delta(g)) == 0 for every diagram of degree <= max_degree with
// at most max_vertices vertices.
inline ComplexCheck verify_complex(Parity parity, int max_vertices, int max_degree) {
  ComplexCheck out;
  std::map<Diagram, DiagramVector> memo;
  auto delta = [&](const Diagram& d) -> const DiagramVector& {
    auto it = memo.find(d);
    if (it == memo.end()) it = memo.emplace(d, coboundary(d)).first;
    return it->second;
  };
  for (int deg = 0; deg <= max_degree; ++deg) {
    EnumerationOptions o;
    o.max_vertices = max_vertices;
    for (auto& g : enumerate_diagrams(deg, parity, o)) {
      DiagramVector dd;
      auto dg = coboundary(g);
      for (auto& [t, c] : dg.terms()) dd += c * delta(t);
      ++out.checked;
      if (!dd.is_zero()) out.failures.push_back(g);
    }
  }
  return out;
}

}  // namespace csi
