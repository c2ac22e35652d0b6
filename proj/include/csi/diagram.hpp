#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace csi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a search or elimination exceeds its configured budget.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

enum class Parity { odd, even };

inline const char* to_string(Parity p) { return p == Parity::odd ? "odd" : "even"; }

inline Parity parse_parity(std::string_view s) {
  if (s == "odd") return Parity::odd;
  if (s == "even") return Parity::even;
  throw Error("unknown parity '" + std::string(s) + "' (expected odd or even)");
}

using VertexPair = std::pair<int, int>;

// Segment vertices are 1..p in segment order, free vertices p+1..p+q.
// Pairs are oriented first -> second; loops carry no orientation.
struct Diagram {
  Parity parity = Parity::odd;
  int p = 0;
  int q = 0;
  std::vector<VertexPair> chords;
  std::vector<int> loops;
  std::vector<VertexPair> edges;
  // Labels of vertices 1..p+q; empty means the identity labelling.
  std::vector<int> vertex_labels;
  // Even parity: labels of chords, loops, edges in that concatenated order.
  std::vector<int> edge_labels;

  int vertex_count() const { return p + q; }
  int edge_count() const {
    return static_cast<int>(chords.size() + loops.size() + edges.size());
  }
  bool is_segment(int v) const { return v >= 1 && v <= p; }

  auto operator<=>(const Diagram&) const = default;
  bool operator==(const Diagram&) const = default;
};

inline int degree(const Diagram& d) { return 2 * d.edge_count() - 3 * d.q - d.p; }

// Number of edges minus free vertices; preserved by the coboundary.
inline int order(const Diagram& d) { return d.edge_count() - d.q; }

namespace detail {

inline int permutation_sign(const std::vector<int>& perm) {
  // perm holds a permutation of 0..n-1
  std::vector<char> seen(perm.size(), 0);
  int sign = 1;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
      seen[j] = 1;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

inline bool is_permutation_of_1_to_n(const std::vector<int>& labels) {
  std::vector<char> seen(labels.size() + 1, 0);
  for (int l : labels) {
    if (l < 1 || l > static_cast<int>(labels.size()) || seen[l]) return false;
    seen[l] = 1;
  }
  return true;
}

inline int label_sign(const std::vector<int>& labels) {
  std::vector<int> perm(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) perm[i] = labels[i] - 1;
  return permutation_sign(perm);
}

inline VertexPair unordered(VertexPair e) {
  return e.first < e.second ? e : VertexPair{e.second, e.first};
}

inline bool has_multiple_edge(const Diagram& d) {
  std::vector<VertexPair> all;
  all.reserve(d.chords.size() + d.edges.size());
  for (auto c : d.chords) all.push_back(unordered(c));
  for (auto e : d.edges) all.push_back(unordered(e));
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) return true;
  std::vector<int> loops = d.loops;
  std::sort(loops.begin(), loops.end());
  return std::adjacent_find(loops.begin(), loops.end()) != loops.end();
}

// Number of edge ends at each vertex (index 1..p+q); excludes the segment.
inline std::vector<int> edge_ends(const Diagram& d) {
  std::vector<int> ends(static_cast<std::size_t>(d.vertex_count()) + 1, 0);
  auto bump = [&](int v, int by) {
    if (v >= 1 && v <= d.vertex_count()) ends[v] += by;
  };
  for (auto [a, b] : d.chords) bump(a, 1), bump(b, 1);
  for (int v : d.loops) bump(v, 2);
  for (auto [a, b] : d.edges) bump(a, 1), bump(b, 1);
  return ends;
}

}  // namespace detail

inline int valence(const Diagram& d, int v) {
  return detail::edge_ends(d)[v] + (d.is_segment(v) ? 2 : 0);
}

inline std::vector<std::string> validate(const Diagram& d) {
  std::vector<std::string> out;
  if (d.p < 0 || d.q < 0) {
    out.push_back("negative vertex count");
    return out;
  }
  const int n = d.vertex_count();
  auto in_range = [&](int v) { return v >= 1 && v <= n; };
  bool ranges_ok = true;
  for (auto [a, b] : d.chords) {
    if (!d.is_segment(a) || !d.is_segment(b)) {
      out.push_back("chord (" + std::to_string(a) + "," + std::to_string(b) +
                    ") has an endpoint that is not a segment vertex");
      ranges_ok = false;
    } else if (a == b) {
      out.push_back("chord (" + std::to_string(a) + "," + std::to_string(b) +
                    ") pairs a vertex with itself");
    }
  }
  for (int v : d.loops) {
    if (!d.is_segment(v)) {
      out.push_back("loop at " + std::to_string(v) + " is not at a segment vertex");
      ranges_ok = false;
    }
  }
  for (auto [a, b] : d.edges) {
    std::string name = "edge (" + std::to_string(a) + "," + std::to_string(b) + ")";
    if (!in_range(a) || !in_range(b)) {
      out.push_back(name + " has an endpoint out of range");
      ranges_ok = false;
    } else if (a == b) {
      out.push_back(name + " pairs a vertex with itself");
    } else if (d.is_segment(a) && d.is_segment(b)) {
      out.push_back(name + " joins two segment vertices (use a chord)");
    }
  }
  if (!d.vertex_labels.empty()) {
    if (static_cast<int>(d.vertex_labels.size()) != n ||
        !detail::is_permutation_of_1_to_n(d.vertex_labels)) {
      out.push_back("vertex labels are not a permutation of 1.." + std::to_string(n));
    } else if (d.parity == Parity::even) {
      for (int v = 1; v <= d.p; ++v)
        if (d.vertex_labels[v - 1] > d.p)
          out.push_back("even parity: segment vertex " + std::to_string(v) +
                        " carries a free-vertex label");
    }
  }
  if (!d.edge_labels.empty()) {
    if (d.parity == Parity::odd) {
      out.push_back("edge labels are only meaningful for even parity");
    } else if (static_cast<int>(d.edge_labels.size()) != d.edge_count() ||
               !detail::is_permutation_of_1_to_n(d.edge_labels)) {
      out.push_back("edge labels are not a permutation of 1.." +
                    std::to_string(d.edge_count()));
    }
  }
  if (!ranges_ok) return out;

  auto ends = detail::edge_ends(d);
  for (int v = 1; v <= n; ++v) {
    int val = ends[v] + (d.is_segment(v) ? 2 : 0);
    if (val < 3)
      out.push_back(std::string(d.is_segment(v) ? "segment" : "free") + " vertex " +
                    std::to_string(v) + " has valence " + std::to_string(val));
  }

  // The segment itself joins all segment vertices.
  if (n > 0) {
    std::vector<int> parent(static_cast<std::size_t>(n) + 1);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
      return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    auto join = [&](int a, int b) { parent[find(a)] = find(b); };
    for (int v = 2; v <= d.p; ++v) join(v - 1, v);
    for (auto [a, b] : d.chords) join(a, b);
    for (auto [a, b] : d.edges) join(a, b);
    int root = find(1);
    for (int v = 2; v <= n; ++v)
      if (find(v) != root) {
        out.push_back("diagram is disconnected");
        break;
      }
    if (d.p == 0) out.push_back("diagram has no segment vertex");
  }
  return out;
}

inline void require_valid(const Diagram& d) {
  auto v = validate(d);
  if (v.empty()) return;
  std::string msg = "invalid diagram:";
  for (auto& s : v) msg += " " + s + ";";
  throw Error(msg);
}

// ---------------------------------------------------------------------------
// Text encoding

inline std::string encode(const Diagram& d) {
  std::ostringstream os;
  auto pairs = [&](const std::vector<VertexPair>& v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i)
      os << (i ? "," : "") << '(' << v[i].first << ',' << v[i].second << ')';
    os << ']';
  };
  auto ints = [&](const std::vector<int>& v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ']';
  };
  os << "p=" << d.p << " q=" << d.q << " chords=";
  pairs(d.chords);
  os << " loops=";
  ints(d.loops);
  os << " edges=";
  pairs(d.edges);
  os << " parity=" << to_string(d.parity);
  if (!d.vertex_labels.empty()) {
    os << " vlabels=";
    ints(d.vertex_labels);
  }
  if (!d.edge_labels.empty()) {
    os << " elabels=";
    ints(d.edge_labels);
  }
  return os.str();
}

namespace detail {

class EncodingReader {
 public:
  explicit EncodingReader(std::string_view s) : s_(s) {}

  void expect(std::string_view tok) {
    if (s_.substr(pos_, tok.size()) != tok)
      fail("expected '" + std::string(tok) + "'");
    pos_ += tok.size();
  }
  bool try_take(std::string_view tok) {
    if (s_.substr(pos_, tok.size()) != tok) return false;
    pos_ += tok.size();
    return true;
  }
  int integer() {
    std::size_t start = pos_;
    if (pos_ < s_.size() && s_[pos_] == '-') ++pos_;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
    if (pos_ == start || (pos_ == start + 1 && s_[start] == '-')) fail("expected integer");
    return std::stoi(std::string(s_.substr(start, pos_ - start)));
  }
  std::vector<int> int_list() {
    std::vector<int> out;
    expect("[");
    if (try_take("]")) return out;
    do out.push_back(integer());
    while (try_take(","));
    expect("]");
    return out;
  }
  std::vector<VertexPair> pair_list() {
    std::vector<VertexPair> out;
    expect("[");
    if (try_take("]")) return out;
    do {
      expect("(");
      int a = integer();
      expect(",");
      int b = integer();
      expect(")");
      out.emplace_back(a, b);
    } while (try_take(","));
    expect("]");
    return out;
  }
  std::string word() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] >= 'a' && s_[pos_] <= 'z') ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }
  bool done() const { return pos_ == s_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error("diagram encoding: " + what + " at offset " + std::to_string(pos_) +
                " in '" + std::string(s_) + "'");
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Diagram decode(std::string_view text) {
  detail::EncodingReader r(text);
  Diagram d;
  r.expect("p=");
  d.p = r.integer();
  r.expect(" q=");
  d.q = r.integer();
  r.expect(" chords=");
  d.chords = r.pair_list();
  r.expect(" loops=");
  d.loops = r.int_list();
  r.expect(" edges=");
  d.edges = r.pair_list();
  r.expect(" parity=");
  d.parity = parse_parity(r.word());
  if (r.try_take(" vlabels=")) d.vertex_labels = r.int_list();
  if (r.try_take(" elabels=")) d.edge_labels = r.int_list();
  if (!r.done()) r.fail("trailing characters");
  return d;
}

// ---------------------------------------------------------------------------
// Canonical form
//
// Order: a diagram's key is (chords, loops, edges) with every pair written
// (min,max) and each list sorted; keys compare lexicographically.  Segment
// vertices are fixed, so only free-vertex permutations are searched, and
// those are restricted to classes of an invariant colouring.

struct Canonical {
  Diagram diagram;
  int sign = 1;
};

namespace detail {

struct FreeClasses {
  std::vector<int> order;                           // free vertices, class-sorted
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin,end) in order
};

inline FreeClasses free_classes(const Diagram& d) {
  const int n = d.vertex_count();
  auto ends = edge_ends(d);
  std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n) + 1);
  for (auto [a, b] : d.edges) {
    nbrs[a].push_back(b);
    nbrs[b].push_back(a);
  }
  std::vector<std::pair<std::vector<int>, int>> colour;
  for (int f = d.p + 1; f <= n; ++f) {
    std::vector<int> seg, freev;
    for (int w : nbrs[f]) (d.is_segment(w) ? seg : freev).push_back(w);
    std::sort(seg.begin(), seg.end());
    std::vector<int> c{ends[f], static_cast<int>(freev.size())};
    c.insert(c.end(), seg.begin(), seg.end());
    std::vector<int> fv;
    for (int w : freev) fv.push_back(ends[w]);
    std::sort(fv.begin(), fv.end());
    c.push_back(-1);
    c.insert(c.end(), fv.begin(), fv.end());
    colour.emplace_back(std::move(c), f);
  }
  std::sort(colour.begin(), colour.end());
  FreeClasses fc;
  for (std::size_t i = 0; i < colour.size(); ++i) {
    fc.order.push_back(colour[i].second);
    if (i == 0 || colour[i].first != colour[i - 1].first)
      fc.groups.emplace_back(i, i + 1);
    else
      fc.groups.back().second = i + 1;
  }
  return fc;
}

// Calls visit(order) for every class-respecting arrangement; order[i] is the
// old free vertex sent to position p+1+i.
template <class Visit>
void for_each_arrangement(FreeClasses fc, std::size_t budget, Visit&& visit) {
  std::size_t count = 1;
  for (auto [b, e] : fc.groups)
    for (std::size_t k = 2; k <= e - b; ++k) {
      count *= k;
      if (count > budget) throw ResourceLimit("canonical form: free-vertex symmetry search too large");
    }
  for (auto [b, e] : fc.groups) std::sort(fc.order.begin() + b, fc.order.begin() + e);
  while (true) {
    visit(static_cast<const std::vector<int>&>(fc.order));
    std::size_t g = fc.groups.size();
    bool advanced = false;
    while (g-- > 0) {
      auto [b, e] = fc.groups[g];
      if (std::next_permutation(fc.order.begin() + b, fc.order.begin() + e)) {
        advanced = true;
        break;
      }
    }
    if (!advanced) return;
  }
}

inline std::vector<int> vertex_map(const Diagram& d, const std::vector<int>& order) {
  std::vector<int> map(static_cast<std::size_t>(d.vertex_count()) + 1);
  for (int v = 1; v <= d.p; ++v) map[v] = v;
  for (std::size_t i = 0; i < order.size(); ++i) map[order[i]] = d.p + 1 + static_cast<int>(i);
  return map;
}

inline constexpr std::size_t kSymmetryBudget = 5'000'000;

}  // namespace detail

inline Canonical canonical_form(const Diagram& d) {
  require_valid(d);
  Canonical out;
  Diagram& c = out.diagram;
  c.parity = d.parity;
  c.p = d.p;
  c.q = d.q;

  int base = 1;
  if (d.parity == Parity::odd) {
    if (!d.vertex_labels.empty()) base = detail::label_sign(d.vertex_labels);
  } else if (!d.vertex_labels.empty()) {
    base = detail::label_sign({d.vertex_labels.begin(), d.vertex_labels.begin() + d.p});
  }

  if (detail::has_multiple_edge(d)) {
    for (auto e : d.chords) c.chords.push_back(detail::unordered(e));
    c.loops = d.loops;
    for (auto e : d.edges) c.edges.push_back(detail::unordered(e));
    std::sort(c.chords.begin(), c.chords.end());
    std::sort(c.loops.begin(), c.loops.end());
    std::sort(c.edges.begin(), c.edges.end());
    out.sign = 0;
    return out;
  }

  const std::size_t nc = d.chords.size(), nl = d.loops.size(), ne = d.edges.size();
  std::vector<int> elabel(nc + nl + ne);
  if (d.edge_labels.empty())
    std::iota(elabel.begin(), elabel.end(), 1);
  else
    elabel = d.edge_labels;

  // Chords and loops do not move under free permutations.
  std::vector<std::pair<VertexPair, int>> chords;  // (unordered pair, label)
  int chord_flips = 0;
  for (std::size_t i = 0; i < nc; ++i) {
    auto e = d.chords[i];
    if (e.first > e.second) ++chord_flips;
    chords.emplace_back(detail::unordered(e), elabel[i]);
  }
  std::sort(chords.begin(), chords.end());
  std::vector<std::pair<int, int>> loops;
  for (std::size_t i = 0; i < nl; ++i) loops.emplace_back(d.loops[i], elabel[nc + i]);
  std::sort(loops.begin(), loops.end());
  for (auto& [e, l] : chords) c.chords.push_back(e);
  for (auto& [v, l] : loops) c.loops.push_back(v);

  std::vector<VertexPair> best;
  int best_sign = 0;
  bool conflict = false;
  bool have = false;
  std::vector<std::pair<VertexPair, int>> mapped(ne);
  std::vector<VertexPair> key(ne);
  std::vector<int> free_perm(static_cast<std::size_t>(d.q));
  std::vector<int> lperm;

  detail::for_each_arrangement(detail::free_classes(d), detail::kSymmetryBudget,
                               [&](const std::vector<int>& order) {
    auto map = detail::vertex_map(d, order);
    int flips = 0;
    for (std::size_t i = 0; i < ne; ++i) {
      int a = map[d.edges[i].first], b = map[d.edges[i].second];
      if (a > b) ++flips;
      mapped[i] = {detail::unordered({a, b}), elabel[nc + nl + i]};
    }
    std::sort(mapped.begin(), mapped.end());
    for (std::size_t i = 0; i < ne; ++i) key[i] = mapped[i].first;
    int s = base;
    if (d.parity == Parity::odd) {
      for (std::size_t i = 0; i < order.size(); ++i) free_perm[i] = order[i] - d.p - 1;
      s *= detail::permutation_sign(free_perm);
      if ((flips + chord_flips) % 2) s = -s;
    } else {
      lperm.clear();
      for (auto& [e, l] : chords) lperm.push_back(l - 1);
      for (auto& [v, l] : loops) lperm.push_back(l - 1);
      for (auto& [e, l] : mapped) lperm.push_back(l - 1);
      s *= detail::permutation_sign(lperm);
    }
    if (!have || key < best) {
      best = key;
      best_sign = s;
      conflict = false;
      have = true;
    } else if (key == best && s != best_sign) {
      conflict = true;
    }
  });
  c.edges = best;
  out.sign = conflict ? 0 : best_sign;
  return out;
}

// Free-vertex permutations preserving the unoriented edge structure.  The
// segment vertices are fixed.  Expects a canonical diagram.
inline std::int64_t aut_count(const Diagram& d) {
  require_valid(d);
  std::vector<VertexPair> ref;
  for (auto e : d.edges) ref.push_back(detail::unordered(e));
  std::sort(ref.begin(), ref.end());
  std::int64_t count = 0;
  std::vector<VertexPair> key(ref.size());
  detail::for_each_arrangement(detail::free_classes(d), detail::kSymmetryBudget,
                               [&](const std::vector<int>& order) {
    auto map = detail::vertex_map(d, order);
    for (std::size_t i = 0; i < d.edges.size(); ++i)
      key[i] = detail::unordered({map[d.edges[i].first], map[d.edges[i].second]});
    std::sort(key.begin(), key.end());
    if (key == ref) ++count;
  });
  return count;
}

// ---------------------------------------------------------------------------
// Contraction

struct Element {
  enum class Kind { arc, chord, loop, edge };
  Kind kind = Kind::edge;
  // arc: left segment vertex i of the arc (i, i+1); otherwise a 0-based index.
  int index = 0;

  static Element arc(int left) { return {Kind::arc, left}; }
  static Element edge(int i) { return {Kind::edge, i}; }
  static Element chord(int i) { return {Kind::chord, i}; }
  static Element loop(int i) { return {Kind::loop, i}; }
};

struct ContractionResult {
  Diagram diagram;
  int sign = 1;
  bool degenerate = false;
};

inline ContractionResult contract(const Diagram& d, Element el) {
  require_valid(d);
  if (el.kind == Element::Kind::chord || el.kind == Element::Kind::loop)
    throw Error("contract: chords and loops cannot be contracted");
  if (!d.vertex_labels.empty())
    throw Error("contract: expects segment and free vertices in normal order");

  const std::size_t nc = d.chords.size(), nl = d.loops.size();
  std::vector<int> elabel(static_cast<std::size_t>(d.edge_count()));
  if (d.edge_labels.empty())
    std::iota(elabel.begin(), elabel.end(), 1);
  else
    elabel = d.edge_labels;

  int lo = 0, hi = 0, sign = 1;
  std::size_t skip_edge = static_cast<std::size_t>(-1);
  if (el.kind == Element::Kind::arc) {
    if (el.index < 1 || el.index >= d.p)
      throw Error("contract: arc " + std::to_string(el.index) + " is not between two segment vertices");
    lo = el.index;
    hi = el.index + 1;
    sign = (el.index + 1) % 2 ? -1 : 1;
  } else {
    if (el.index < 0 || el.index >= static_cast<int>(d.edges.size()))
      throw Error("contract: edge index out of range");
    auto [a, b] = d.edges[el.index];
    lo = std::min(a, b);
    hi = std::max(a, b);
    skip_edge = static_cast<std::size_t>(el.index);
    if (d.parity == Parity::odd) {
      int e = b > a ? b : a + 1;
      sign = e % 2 ? -1 : 1;
    } else {
      int e = elabel[nc + nl + el.index] + d.p + 1;
      sign = e % 2 ? -1 : 1;
    }
  }

  auto relabel = [&](int v) { return v == hi ? lo : (v > hi ? v - 1 : v); };
  ContractionResult out;
  Diagram& r = out.diagram;
  r.parity = d.parity;
  if (el.kind == Element::Kind::arc) {
    r.p = d.p - 1;
    r.q = d.q;
  } else {
    r.p = d.p;
    r.q = d.q - 1;
  }
  auto seg = [&](int v) { return v >= 1 && v <= r.p; };

  std::vector<int> chord_l, loop_l, edge_l;
  for (std::size_t i = 0; i < nc; ++i) {
    int a = relabel(d.chords[i].first), b = relabel(d.chords[i].second);
    if (a == b) {
      // chord (i, i+1) collapsing onto a loop; reversed chords give reversed loops
      if (d.chords[i].first > d.chords[i].second && d.parity == Parity::odd) sign = -sign;
      r.loops.push_back(a);
      loop_l.push_back(elabel[i]);
    } else {
      r.chords.emplace_back(a, b);
      chord_l.push_back(elabel[i]);
    }
  }
  for (std::size_t i = 0; i < nl; ++i) {
    r.loops.push_back(relabel(d.loops[i]));
    loop_l.push_back(elabel[nc + i]);
  }
  for (std::size_t i = 0; i < d.edges.size(); ++i) {
    if (i == skip_edge) continue;
    int a = relabel(d.edges[i].first), b = relabel(d.edges[i].second);
    if (seg(a) && seg(b)) {
      r.chords.emplace_back(a, b);
      chord_l.push_back(elabel[nc + nl + i]);
    } else {
      r.edges.emplace_back(a, b);
      edge_l.push_back(elabel[nc + nl + i]);
    }
  }
  out.sign = sign;
  out.degenerate = detail::has_multiple_edge(r);
  if (d.parity == Parity::even) {
    std::vector<int> all = chord_l;
    all.insert(all.end(), loop_l.begin(), loop_l.end());
    all.insert(all.end(), edge_l.begin(), edge_l.end());
    std::vector<int> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    r.edge_labels.resize(all.size());
    for (std::size_t i = 0; i < all.size(); ++i)
      r.edge_labels[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), all[i]) - sorted.begin()) + 1;
    bool identity = true;
    for (std::size_t i = 0; i < all.size(); ++i) identity &= r.edge_labels[i] == static_cast<int>(i) + 1;
    if (identity) r.edge_labels.clear();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration

struct EnumerationOptions {
  bool trivalent_only = false;
  int max_vertices = 6;
  std::optional<int> order;  // restrict to one order k
  bool chords_only = false;
  std::size_t node_budget = 50'000'000;
};

namespace detail {

struct EnumState {
  int p = 0, n = 0, degree = 0;
  bool trivalent = false, chords_only = false;
  Parity parity = Parity::odd;
  std::size_t budget = 0, nodes = 0;
  std::vector<int> ends;
  std::vector<VertexPair> pairs;
  std::vector<int> loops;
  std::set<Diagram>* out = nullptr;

  int base(int v) const { return v <= p ? 2 : 0; }

  void tick() {
    if (++nodes > budget) throw ResourceLimit("enumerate_diagrams: node budget exceeded");
  }

  void emit() {
    Diagram d;
    d.parity = parity;
    d.p = p;
    d.q = n - p;
    for (auto [a, b] : pairs) (b <= p ? d.chords : d.edges).emplace_back(a, b);
    d.loops = loops;
    if (!validate(d).empty()) return;
    auto c = canonical_form(d);
    if (c.sign != 0) out->insert(c.diagram);
  }

  // Choose neighbours of v among w > v, starting at candidate w.
  void choose(int v, int w, int used) {
    tick();
    if (w > n) {
      int excess = base(v) + ends[v] - 3;
      if (excess < 0) return;
      if (trivalent && excess != 0) return;
      if (used + excess > degree) return;
      vertex(v + 1, used + excess);
      return;
    }
    // skip w
    choose(v, w + 1, used);
    // take w
    bool chord = v <= p && w <= p;
    if (chords_only && !chord) return;
    ++ends[v];
    ++ends[w];
    int cap = trivalent ? 3 : 3 + degree - used;
    if (base(v) + ends[v] <= cap && base(w) + ends[w] <= cap) {
      pairs.emplace_back(v, w);
      choose(v, w + 1, used);
      pairs.pop_back();
    }
    --ends[v];
    --ends[w];
  }

  void vertex(int v, int used) {
    tick();
    if (v > n) {
      if (used == degree) emit();
      return;
    }
    choose(v, v + 1, used);
    if (v <= p && !trivalent && !chords_only) {
      ends[v] += 2;
      if (base(v) + ends[v] <= 3 + degree - used) {
        loops.push_back(v);
        choose(v, v + 1, used);
        loops.pop_back();
      }
      ends[v] -= 2;
    }
  }
};

}  // namespace detail

// All nonzero canonical diagrams of the given degree with at most
// max_vertices vertices, sorted by the canonical order.
inline std::vector<Diagram> enumerate_diagrams(int degree_target, Parity parity,
                                               const EnumerationOptions& opt = {}) {
  if (degree_target < 0) throw Error("enumerate_diagrams: negative degree");
  std::set<Diagram> found;
  detail::EnumState st;
  st.degree = degree_target;
  st.trivalent = opt.trivalent_only;
  st.chords_only = opt.chords_only;
  st.parity = parity;
  st.budget = opt.node_budget;
  st.out = &found;
  if (opt.trivalent_only && degree_target != 0) return {};
  for (int n = 1; n <= opt.max_vertices; ++n) {
    if ((n + degree_target) % 2) continue;
    int k = (n + degree_target) / 2;
    if (opt.order && *opt.order != k) continue;
    for (int p = 1; p <= n; ++p) {
      if (opt.chords_only && p != n) continue;
      st.p = p;
      st.n = n;
      st.ends.assign(static_cast<std::size_t>(n) + 2, 0);
      st.pairs.clear();
      st.loops.clear();
      st.vertex(1, 0);
    }
  }
  return {found.begin(), found.end()};
}

}  // namespace csi
