#include "margulis/rep_weights.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace margulis::rep_weights {

bool WeightSet::contains(const Weight& w) const {
  return std::binary_search(weights.begin(), weights.end(), w,
                            [](const Weight& a, const Weight& b) { return rv_key(a) < rv_key(b); });
}

long WeightSet::dimension() const {
  if (multiplicities.empty()) throw std::logic_error("weight multiplicities not computed");
  long d = 0;
  for (const auto& [k, m] : multiplicities) d += m;
  return d;
}

long WeightSet::multiplicity(const Weight& w) const {
  auto it = multiplicities.find(rv_key(w));
  return it == multiplicities.end() ? 0 : it->second;
}

std::vector<RatVec> weyl_orbit(const RootSystemData& rs, const RatVec& x) {
  std::set<std::string> seen;
  std::deque<RatVec> frontier{x};
  std::vector<RatVec> out;
  seen.insert(rv_key(x));
  out.push_back(x);
  while (!frontier.empty()) {
    RatVec cur = std::move(frontier.front());
    frontier.pop_front();
    for (const auto& a : rs.simple_roots) {
      RatVec img = rs.reflect(a, cur);
      if (seen.insert(rv_key(img)).second) {
        out.push_back(img);
        frontier.push_back(std::move(img));
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const RatVec& a, const RatVec& b) { return rv_key(a) < rv_key(b); });
  return out;
}

bool in_weyl_hull(const RootSystemData& rs, const RatVec& x, const RatVec& y, HullMethod method) {
  if (method == HullMethod::Lp) return in_convex_hull_lp(weyl_orbit(rs, x), y);
  // y lies in Conv(W.x) iff x - y+ is a nonnegative combination of simple
  // roots, where y+ is the dominant representative of y and x is dominant.
  const RatVec xd = rs.dominant_representative(x);
  const RatVec yd = rs.dominant_representative(y);
  const auto coords = rs.simple_root_coordinates(sub(xd, yd));
  if (!coords) return false;
  for (const auto& c : *coords)
    if (c < 0) return false;
  return true;
}

WeightSet weight_set(const RootSystemData& rs, const Weight& highest, HullMethod method) {
  if (!rs.is_dominant(highest))
    throw std::invalid_argument("weight_set: highest weight is not dominant");
  // Must lie in the restricted weight lattice (integer fundamental-weight
  // coordinates).
  for (int j = 0; j < rs.rank; ++j) {
    const RatVec ap = rs.alpha_prime(j);
    const Rat c = 2 * dot(highest, ap) / dot(ap, ap);
    if (c.get_den() != 1)
      throw std::invalid_argument("weight_set: highest weight is not in the weight lattice");
  }
  WeightSet ws;
  ws.highest = highest;
  // Every weight is highest - sum c_i alpha_i with integer c_i >= 0 bounded
  // by the orbit vertices; enumerate that box and keep the hull points.
  std::vector<long> box(rs.rank, 0);
  for (const auto& v : weyl_orbit(rs, highest)) {
    const auto c = rs.simple_root_coordinates(sub(highest, v));
    if (!c) throw std::logic_error("orbit point not in the root lattice span");
    for (int i = 0; i < rs.rank; ++i) {
      if ((*c)[i].get_den() != 1) throw std::logic_error("orbit displacement not integral");
      box[i] = std::max(box[i], static_cast<long>((*c)[i].get_num().get_si()));
    }
  }
  std::vector<Weight> found;
  std::vector<long> c(rs.rank, 0);
  for (;;) {
    Weight cand = highest;
    for (int i = 0; i < rs.rank; ++i) cand = sub(cand, scale(c[i], rs.simple_roots[i]));
    if (in_weyl_hull(rs, highest, cand, method)) found.push_back(cand);
    int i = 0;
    while (i < rs.rank && ++c[i] > box[i]) c[i++] = 0;
    if (i == rs.rank) break;
  }
  std::sort(found.begin(), found.end(),
            [](const Weight& a, const Weight& b) { return rv_key(a) < rv_key(b); });
  ws.weights = std::move(found);
  return ws;
}

WeightSet weight_set_from_pi_coords(const RootSystemData& rs, const RatVec& pi_coords,
                                    HullMethod method) {
  if (static_cast<int>(pi_coords.size()) != rs.rank)
    throw std::invalid_argument("weight_set: expected one coordinate per fundamental weight");
  for (const auto& c : pi_coords)
    if (c < 0 || c.get_den() != 1)
      throw std::invalid_argument("weight_set: fundamental-weight coordinates must be nonnegative integers");
  return weight_set(rs, rs.weight_from_pi_coords(pi_coords), method);
}

WeightSet multiplicities_split(const RootSystemData& rs, const Weight& highest) {
  if (rs.family == root_system::Family::BC)
    throw std::invalid_argument("multiplicities unavailable for non-split (BC-type) systems");
  for (bool d : rs.doubled)
    if (d) throw std::invalid_argument("multiplicities unavailable for non-split systems");
  WeightSet ws = weight_set(rs, highest);

  // Freudenthal recursion in exact arithmetic, descending by height.
  RatVec delta = rv_zero(rs.ambient_dim);
  for (const auto& a : rs.positive_roots) delta = add(delta, scale(Rat(1, 2), a));
  auto height = [&](const Weight& w) {
    const auto c = rs.simple_root_coordinates(sub(highest, w));
    Rat h = 0;
    for (const auto& x : *c) h += x;
    return h;
  };
  std::vector<Weight> order = ws.weights;
  std::sort(order.begin(), order.end(),
            [&](const Weight& a, const Weight& b) { return height(a) < height(b); });

  std::map<std::string, Rat> mult;
  const RatVec lpd = add(highest, delta);
  const Rat norm_top = dot(lpd, lpd);
  for (const auto& mu : order) {
    if (mu == highest) {
      mult[rv_key(mu)] = 1;
      continue;
    }
    const RatVec mpd = add(mu, delta);
    const Rat denom = norm_top - dot(mpd, mpd);
    Rat num = 0;
    for (const auto& a : rs.positive_roots) {
      for (int k = 1;; ++k) {
        const Weight shifted = add(mu, scale(k, a));
        auto it = mult.find(rv_key(shifted));
        if (it == mult.end()) {
          if (!ws.contains(shifted)) break;
          throw std::logic_error("Freudenthal: weight visited out of order");
        }
        num += it->second * dot(shifted, a);
      }
    }
    mult[rv_key(mu)] = 2 * num / denom;
  }
  for (const auto& [k, m] : mult) {
    if (m.get_den() != 1 || m <= 0) throw std::logic_error("Freudenthal produced a non-integer multiplicity");
    ws.multiplicities[k] = static_cast<long>(m.get_num().get_si());
  }
  return ws;
}

RepClassification classify(const RootSystemData& rs, const WeightSet& omega) {
  if (omega.weights.empty()) throw std::invalid_argument("classify: empty weight set");
  RepClassification rc;
  const RatVec zero = rv_zero(rs.ambient_dim);
  rc.zero_is_weight = omega.contains(zero);
  rc.limited = true;
  for (const auto& w : omega.weights) {
    if (is_zero(w)) continue;
    bool multiple_of_root = false;
    for (const auto& a : rs.all_roots) {
      // w == n*a with integer n: check collinearity and integer ratio.
      std::optional<Rat> ratio;
      bool ok = true;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (a[i] == 0) {
          if (w[i] != 0) ok = false;
        } else {
          Rat r = w[i] / a[i];
          if (!ratio) ratio = r;
          else if (*ratio != r) ok = false;
        }
        if (!ok) break;
      }
      if (ok && ratio && ratio->get_den() == 1) {
        multiple_of_root = true;
        break;
      }
    }
    if (!multiple_of_root) {
      rc.limited = false;
      break;
    }
  }
  rc.abundant = rc.zero_is_weight;
  for (const auto& a : rs.all_roots)
    if (!omega.contains(a)) {
      rc.abundant = false;
      break;
    }
  rc.awkward = !rc.limited && !rc.abundant;
  for (const auto& w : omega.weights)
    if (matvec(rs.w0, w) == w) rc.omega_w0.push_back(w);
  // Non-swinging means the w0-fixed weights are at most the zero weight.
  rc.swinging = false;
  for (const auto& w : rc.omega_w0)
    if (!is_zero(w)) rc.swinging = true;
  return rc;
}

std::optional<bool> roots_in_weights_check(const RootSystemData& rs, const WeightSet& omega) {
  if (!rs.is_simple() || !rs.simply_laced()) return std::nullopt;
  const RatVec zero = rv_zero(rs.ambient_dim);
  if (!omega.contains(zero) || omega.weights.size() <= 1) return std::nullopt;
  for (const auto& a : rs.all_roots)
    if (!omega.contains(a)) return false;
  return true;
}

WeightSet adjoint_weight_set(const RootSystemData& rs) {
  WeightSet ws;
  // Highest root: the dominant representative with maximal pairing against
  // every fundamental weight; for our realizations it is the unique dominant
  // long root of each factor; as a weight set we just take Sigma and 0.
  ws.weights = rs.all_roots;
  ws.weights.push_back(rv_zero(rs.ambient_dim));
  std::sort(ws.weights.begin(), ws.weights.end(),
            [](const Weight& a, const Weight& b) { return rv_key(a) < rv_key(b); });
  for (const auto& a : ws.weights) ws.multiplicities[rv_key(a)] = 1;
  ws.multiplicities[rv_key(rv_zero(rs.ambient_dim))] = rs.rank;
  // Highest: dominant root (exists for simple factors; for products take the
  // first factor's).
  Weight best;
  for (const auto& a : rs.all_roots)
    if (rs.is_dominant(a)) {
      if (best.empty() || dot(a, a) > dot(best, best)) best = a;
    }
  ws.highest = best;
  return ws;
}

}  // namespace margulis::rep_weights
