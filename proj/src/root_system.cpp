#include "margulis/root_system.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace margulis::root_system {

namespace {

RatVec e(int dim, int i, const Rat& c = 1) {
  RatVec v = rv_zero(dim);
  v[i] = c;
  return v;
}

void check_rank(Family f, int n) {
  const int min = (f == Family::D) ? 2 : 1;
  if (n < min)
    throw std::invalid_argument("unsupported family/rank pair: " + family_name(f) + " with n=" +
                                std::to_string(n) + " (minimum rank " + std::to_string(min) + ")");
}

// Fundamental weights from the duality 2<w_i, a'_j>/|a'_j|^2 = delta_ij,
// solved exactly inside the span of the simple roots.
std::vector<RatVec> solve_fundamental_weights(const RootSystemData& rs) {
  const int r = rs.rank;
  const int d = rs.ambient_dim;
  // w_i = sum_k c_k alpha_k; constraints over j give an r x r system.
  RatMat sys(r, rv_zero(r));
  for (int j = 0; j < r; ++j) {
    const RatVec ap = rs.alpha_prime(j);
    const Rat norm2 = dot(ap, ap);
    for (int k = 0; k < r; ++k) sys[j][k] = 2 * dot(rs.simple_roots[k], ap) / norm2;
  }
  const RatMat inv = invert(sys);
  std::vector<RatVec> out;
  for (int i = 0; i < r; ++i) {
    RatVec w = rv_zero(d);
    for (int k = 0; k < r; ++k) w = add(w, scale(inv[k][i], rs.simple_roots[k]));
    out.push_back(w);
  }
  return out;
}

RatMat minus_identity(int d) {
  RatMat m = rm_identity(d);
  for (int i = 0; i < d; ++i) m[i][i] = -1;
  return m;
}

void finalize(RootSystemData& rs) {
  rs.all_roots = rs.positive_roots;
  for (const auto& a : rs.positive_roots) rs.all_roots.push_back(neg(a));
  rs.gram = rm_identity(rs.ambient_dim);
  rs.fundamental_weights = solve_fundamental_weights(rs);
  if (rs.factor_ranks.empty()) rs.factor_ranks = {rs.rank};

  // Construction-time invariants; cheap enough to keep always on.
  for (const auto& a : rs.positive_roots) {
    const RatVec img = matvec(rs.w0, a);
    bool found = false;
    for (const auto& b : rs.positive_roots)
      if (neg(b) == img) found = true;
    if (!found) throw std::logic_error("w0 does not map positive roots to negative roots");
  }
  if (matmul(rs.w0, rs.w0) != rm_identity(rs.ambient_dim))
    throw std::logic_error("w0 is not an involution");
  for (int i = 0; i < rs.rank; ++i)
    for (int j = 0; j < rs.rank; ++j) {
      const RatVec ap = rs.alpha_prime(j);
      const Rat v = 2 * dot(rs.fundamental_weights[i], ap) / dot(ap, ap);
      if (v != Rat(i == j ? 1 : 0)) throw std::logic_error("fundamental weight duality failed");
    }
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::A: return "A";
    case Family::B: return "B";
    case Family::C: return "C";
    case Family::D: return "D";
    case Family::BC: return "BC";
    case Family::Product: return "product";
  }
  return "?";
}

Family family_from_name(const std::string& s) {
  if (s == "A") return Family::A;
  if (s == "B") return Family::B;
  if (s == "C") return Family::C;
  if (s == "D") return Family::D;
  if (s == "BC") return Family::BC;
  if (s == "product") return Family::Product;
  throw std::invalid_argument("unknown root system family: " + s);
}

bool RootSystemData::simply_laced() const {
  std::set<Rat> lengths;
  for (const auto& a : all_roots) lengths.insert(dot(a, a));
  return lengths.size() <= 1;
}

RatVec RootSystemData::reflect(const RatVec& root, const RatVec& x) const {
  const Rat c = 2 * dot(root, x) / dot(root, root);
  return sub(x, scale(c, root));
}

bool RootSystemData::is_root(const RatVec& v) const {
  return std::find(all_roots.begin(), all_roots.end(), v) != all_roots.end();
}

bool RootSystemData::is_dominant(const RatVec& x) const {
  for (const auto& a : simple_roots)
    if (dot(a, x) < 0) return false;
  return true;
}

bool RootSystemData::is_strictly_dominant(const RatVec& x) const {
  for (const auto& a : simple_roots)
    if (dot(a, x) <= 0) return false;
  return true;
}

RatVec RootSystemData::dominant_representative(RatVec x) const {
  for (;;) {
    bool moved = false;
    for (const auto& a : simple_roots) {
      if (dot(a, x) < 0) {
        x = reflect(a, x);
        moved = true;
      }
    }
    if (!moved) return x;
  }
}

RatVec RootSystemData::alpha_prime(int i) const {
  return doubled[i] ? scale(2, simple_roots[i]) : simple_roots[i];
}

std::optional<RatVec> RootSystemData::simple_root_coordinates(const RatVec& v) const {
  RatMat a(ambient_dim, rv_zero(rank));
  for (int i = 0; i < ambient_dim; ++i)
    for (int j = 0; j < rank; ++j) a[i][j] = simple_roots[j][i];
  return solve_linear(a, v);
}

RatVec RootSystemData::weight_from_pi_coords(const RatVec& coords) const {
  RatVec w = rv_zero(ambient_dim);
  for (int i = 0; i < rank; ++i) w = add(w, scale(coords[i], fundamental_weights[i]));
  return w;
}

RootSystemData build_root_system(Family family, int n) {
  check_rank(family, n);
  RootSystemData rs;
  rs.family = family;
  rs.rank = n;
  switch (family) {
    case Family::A: {
      const int d = n + 1;
      rs.ambient_dim = d;
      for (int i = 0; i < n; ++i) rs.simple_roots.push_back(sub(e(d, i), e(d, i + 1)));
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) rs.positive_roots.push_back(sub(e(d, i), e(d, j)));
      rs.doubled.assign(n, false);
      // w0 is the coordinate reversal.
      rs.w0 = RatMat(d, rv_zero(d));
      for (int i = 0; i < d; ++i) rs.w0[i][d - 1 - i] = 1;
      break;
    }
    case Family::B: {
      rs.ambient_dim = n;
      for (int i = 0; i + 1 < n; ++i) rs.simple_roots.push_back(sub(e(n, i), e(n, i + 1)));
      rs.simple_roots.push_back(e(n, n - 1));
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          rs.positive_roots.push_back(sub(e(n, i), e(n, j)));
          rs.positive_roots.push_back(add(e(n, i), e(n, j)));
        }
        rs.positive_roots.push_back(e(n, i));
      }
      rs.doubled.assign(n, false);
      rs.w0 = minus_identity(n);
      break;
    }
    case Family::C: {
      rs.ambient_dim = n;
      for (int i = 0; i + 1 < n; ++i) rs.simple_roots.push_back(sub(e(n, i), e(n, i + 1)));
      rs.simple_roots.push_back(e(n, n - 1, 2));
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          rs.positive_roots.push_back(sub(e(n, i), e(n, j)));
          rs.positive_roots.push_back(add(e(n, i), e(n, j)));
        }
        rs.positive_roots.push_back(e(n, i, 2));
      }
      rs.doubled.assign(n, false);
      rs.w0 = minus_identity(n);
      break;
    }
    case Family::D: {
      rs.ambient_dim = n;
      for (int i = 0; i + 1 < n; ++i) rs.simple_roots.push_back(sub(e(n, i), e(n, i + 1)));
      rs.simple_roots.push_back(add(e(n, n - 2), e(n, n - 1)));
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          rs.positive_roots.push_back(sub(e(n, i), e(n, j)));
          rs.positive_roots.push_back(add(e(n, i), e(n, j)));
        }
      rs.doubled.assign(n, false);
      rs.w0 = minus_identity(n);
      if (n % 2 == 1) rs.w0[n - 1][n - 1] = 1;
      break;
    }
    case Family::BC: {
      rs.ambient_dim = n;
      for (int i = 0; i + 1 < n; ++i) rs.simple_roots.push_back(sub(e(n, i), e(n, i + 1)));
      rs.simple_roots.push_back(e(n, n - 1));
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          rs.positive_roots.push_back(sub(e(n, i), e(n, j)));
          rs.positive_roots.push_back(add(e(n, i), e(n, j)));
        }
        rs.positive_roots.push_back(e(n, i));
        rs.positive_roots.push_back(e(n, i, 2));
      }
      rs.doubled.assign(n, false);
      rs.doubled[n - 1] = true;
      rs.w0 = minus_identity(n);
      break;
    }
    case Family::Product:
      throw std::invalid_argument("use product_root_system to build products");
  }
  finalize(rs);
  return rs;
}

RootSystemData build_root_system(const std::string& family, int n) {
  return build_root_system(family_from_name(family), n);
}

RootSystemData product_root_system(const std::vector<RootSystemData>& parts) {
  if (parts.empty()) throw std::invalid_argument("product of zero root systems");
  if (parts.size() == 1) return parts[0];
  RootSystemData rs;
  rs.family = Family::Product;
  rs.rank = 0;
  rs.ambient_dim = 0;
  for (const auto& p : parts) {
    rs.rank += p.rank;
    rs.ambient_dim += p.ambient_dim;
  }
  rs.w0 = RatMat(rs.ambient_dim, rv_zero(rs.ambient_dim));
  int off = 0;
  auto embed = [&](const RatVec& v, int offset) {
    RatVec r = rv_zero(rs.ambient_dim);
    for (std::size_t i = 0; i < v.size(); ++i) r[offset + i] = v[i];
    return r;
  };
  for (const auto& p : parts) {
    for (const auto& a : p.simple_roots) rs.simple_roots.push_back(embed(a, off));
    for (const auto& a : p.positive_roots) rs.positive_roots.push_back(embed(a, off));
    for (int i = 0; i < p.rank; ++i) rs.doubled.push_back(p.doubled[i]);
    for (int i = 0; i < p.ambient_dim; ++i)
      for (int j = 0; j < p.ambient_dim; ++j) rs.w0[off + i][off + j] = p.w0[i][j];
    for (int fr : p.factor_ranks) rs.factor_ranks.push_back(fr);
    off += p.ambient_dim;
  }
  finalize(rs);
  return rs;
}

std::vector<WeylElement> weyl_group(const RootSystemData& rs, std::size_t max_order) {
  std::vector<RatMat> gens;
  for (const auto& a : rs.simple_roots) {
    RatMat m(rs.ambient_dim, rv_zero(rs.ambient_dim));
    for (int j = 0; j < rs.ambient_dim; ++j) {
      RatVec img = rs.reflect(a, e(rs.ambient_dim, j));
      for (int i = 0; i < rs.ambient_dim; ++i) m[i][j] = img[i];
    }
    gens.push_back(std::move(m));
  }
  std::vector<WeylElement> out;
  std::set<std::string> seen;
  std::deque<WeylElement> frontier;
  WeylElement id{rm_identity(rs.ambient_dim), {}};
  seen.insert(rm_key(id.matrix));
  out.push_back(id);
  frontier.push_back(id);
  while (!frontier.empty()) {
    WeylElement cur = std::move(frontier.front());
    frontier.pop_front();
    for (std::size_t g = 0; g < gens.size(); ++g) {
      WeylElement nxt;
      nxt.matrix = matmul(gens[g], cur.matrix);
      const std::string key = rm_key(nxt.matrix);
      if (!seen.insert(key).second) continue;
      nxt.word = cur.word;
      nxt.word.insert(nxt.word.begin(), static_cast<int>(g));
      if (out.size() >= max_order) throw WeylTooLargeError(out.size() + 1);
      out.push_back(nxt);
      frontier.push_back(std::move(nxt));
    }
  }
  return out;
}

std::vector<WeylElement> stabilizer_in_W(const RootSystemData& rs, const RatVec& x,
                                         std::size_t max_order) {
  std::vector<WeylElement> out;
  for (const auto& w : weyl_group(rs, max_order))
    if (matvec(w.matrix, x) == x) out.push_back(w);
  return out;
}

std::vector<WeylElement> setwise_stabilizer_in_W(const RootSystemData& rs,
                                                 const std::vector<RatVec>& set,
                                                 std::size_t max_order) {
  std::set<std::string> keys;
  for (const auto& v : set) keys.insert(rv_key(v));
  std::vector<WeylElement> out;
  for (const auto& w : weyl_group(rs, max_order)) {
    bool ok = true;
    for (const auto& v : set)
      if (!keys.count(rv_key(matvec(w.matrix, v)))) {
        ok = false;
        break;
      }
    if (ok) out.push_back(w);
  }
  return out;
}

namespace {

nlohmann::json rv_to_json(const RatVec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& x : v) a.push_back(rat_to_string(x));
  return a;
}

RatVec rv_from_json(const nlohmann::json& a) {
  RatVec v;
  for (const auto& s : a) v.push_back(rat_from_string(s.get<std::string>()));
  return v;
}

nlohmann::json rm_to_json(const RatMat& m) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& row : m) a.push_back(rv_to_json(row));
  return a;
}

RatMat rm_from_json(const nlohmann::json& a) {
  RatMat m;
  for (const auto& row : a) m.push_back(rv_from_json(row));
  return m;
}

}  // namespace

nlohmann::json to_json(const RootSystemData& rs) {
  nlohmann::json j;
  j["family"] = family_name(rs.family);
  j["rank"] = rs.rank;
  j["ambient_dim"] = rs.ambient_dim;
  j["simple_roots"] = nlohmann::json::array();
  for (const auto& a : rs.simple_roots) j["simple_roots"].push_back(rv_to_json(a));
  j["positive_roots"] = nlohmann::json::array();
  for (const auto& a : rs.positive_roots) j["positive_roots"].push_back(rv_to_json(a));
  j["doubled"] = rs.doubled;
  j["gram"] = rm_to_json(rs.gram);
  j["fundamental_weights"] = nlohmann::json::array();
  for (const auto& w : rs.fundamental_weights) j["fundamental_weights"].push_back(rv_to_json(w));
  j["w0"] = rm_to_json(rs.w0);
  j["factor_ranks"] = rs.factor_ranks;
  return j;
}

RootSystemData root_system_from_json(const nlohmann::json& j) {
  RootSystemData rs;
  rs.family = family_from_name(j.at("family").get<std::string>());
  rs.rank = j.at("rank").get<int>();
  rs.ambient_dim = j.at("ambient_dim").get<int>();
  for (const auto& a : j.at("simple_roots")) rs.simple_roots.push_back(rv_from_json(a));
  for (const auto& a : j.at("positive_roots")) rs.positive_roots.push_back(rv_from_json(a));
  rs.doubled = j.at("doubled").get<std::vector<bool>>();
  rs.gram = rm_from_json(j.at("gram"));
  for (const auto& w : j.at("fundamental_weights")) rs.fundamental_weights.push_back(rv_from_json(w));
  rs.w0 = rm_from_json(j.at("w0"));
  rs.factor_ranks = j.at("factor_ranks").get<std::vector<int>>();
  rs.all_roots = rs.positive_roots;
  for (const auto& a : rs.positive_roots) rs.all_roots.push_back(neg(a));
  return rs;
}

}  // namespace margulis::root_system
