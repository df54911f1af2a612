#include "margulis/group_builder.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <atomic>
#include <thread>
#include <cmath>
#include <functional>

namespace margulis::group_builder {

using affine_dynamics::DynamicalSplit;
using Eigen::MatrixXd;

bool WordSpec::reduced() const {
  for (std::size_t m = 0; m + 1 < letters.size(); ++m)
    if (letters[m + 1].gen == letters[m].gen && letters[m + 1].sign == -letters[m].sign)
      return false;
  return true;
}

bool WordSpec::cyclically_reduced() const {
  if (!reduced()) return false;
  if (letters.size() <= 1) return true;
  const Letter& first = letters.front();
  const Letter& last = letters.back();
  return !(first.gen == last.gen && first.sign == -last.sign);
}

std::string WordSpec::text() const {
  std::string s;
  for (const auto& l : letters) {
    if (!s.empty()) s += '.';
    s += 'g' + std::to_string(l.gen + 1);
    if (l.sign < 0) s += "^-1";
  }
  return s;
}

std::vector<WordSpec> enumerate_words(int k, int max_len, WordMode mode) {
  if (max_len < 1) throw std::invalid_argument("enumerate_words: max_len must be >= 1");
  std::vector<WordSpec> out;
  std::vector<Letter> alphabet;
  for (int g = 0; g < k; ++g) {
    alphabet.push_back({g, +1});
    alphabet.push_back({g, -1});
  }
  WordSpec cur;
  std::function<void(int)> rec = [&](int remaining) {
    if (!cur.letters.empty()) {
      if (mode == WordMode::Reduced ? cur.reduced() : cur.cyclically_reduced())
        out.push_back(cur);
    }
    if (remaining == 0) return;
    for (const Letter& l : alphabet) {
      if (!cur.letters.empty()) {
        const Letter& prev = cur.letters.back();
        if (prev.gen == l.gen && prev.sign == -l.sign) continue;  // keep reduced
      }
      cur.letters.push_back(l);
      rec(remaining - 1);
      cur.letters.pop_back();
    }
  };
  rec(max_len);
  std::stable_sort(out.begin(), out.end(), [](const WordSpec& a, const WordSpec& b) {
    return a.length() < b.length();
  });
  return out;
}

AffineElement evaluate_word(const Context& ctx, const GeneratorFamily& family,
                            const WordSpec& word) {
  const int d_std = ctx.rep().dim_std();
  // product in orthogonal * remainder form, QR-refreshed every 8 letters
  MatrixXd q = MatrixXd::Identity(d_std, d_std);
  MatrixXd s = MatrixXd::Identity(d_std, d_std);
  VectorXd trans = VectorXd::Zero(ctx.dim_v());
  std::vector<AffineElement> inv_cache;
  for (const auto& g : family.gens) inv_cache.push_back(ctx.inverse(g));
  int since_refresh = 0;
  for (const auto& l : word.letters) {
    const AffineElement& e = l.sign > 0 ? family.gens[l.gen] : inv_cache[l.gen];
    trans += ctx.rho(q * s) * e.trans;
    s = s * e.std_mat;
    if (++since_refresh == 8) {
      Eigen::HouseholderQR<MatrixXd> qr(s);
      const MatrixXd q2 = qr.householderQ();
      s = q2.transpose() * s;
      q = q * q2;
      since_refresh = 0;
    }
  }
  return ctx.element(q * s, trans);
}

namespace {

VectorXd minus_w0_fixed_direction(const Context& ctx) {
  // unit vector in V^t0 coordinates with w0 . m = -m
  const MatrixXd& w = ctx.w0_on_t();
  const int t = static_cast<int>(w.rows());
  if (t == 0) throw std::invalid_argument("V^t0 is trivial: the criterion fails");
  Eigen::JacobiSVD<MatrixXd> svd(w + MatrixXd::Identity(t, t), Eigen::ComputeFullV);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-8) ++rank;
  if (rank == t)
    throw std::invalid_argument("w0 has no -1 eigenvector on V^t0: the criterion fails");
  VectorXd m = svd.matrixV().col(t - 1);
  for (int i = 0; i < t; ++i) {
    if (std::abs(m(i)) > 1e-9) {
      if (m(i) < 0) m = -m;
      break;
    }
  }
  return m;
}

}  // namespace

GeneratorFamily build_family(const Context& ctx, int k, int power, double m_norm,
                             double s_threshold, std::uint64_t seed, double c_bound_limit,
                             int retry_budget, double weight_scale) {
  if (k < 2) throw std::invalid_argument("need k >= 2 generators for a nonabelian free group");
  GeneratorFamily fam;
  fam.power_used = power;
  fam.m_norm = m_norm;
  fam.s_threshold = s_threshold;
  fam.m_c = minus_w0_fixed_direction(ctx) * m_norm;

  std::mt19937_64 rng(seed);
  const auto& rs = ctx.rep().rs();
  const auto& omega = ctx.rep().omega();

  std::vector<MatrixXd> linear_parts;
  std::vector<DynamicalSplit> splits_fwd, splits_bwd;
  for (int attempt = 0; attempt < retry_budget && static_cast<int>(linear_parts.size()) < k;
       ++attempt) {
    const RatVec y = x0_select::compatible_cone_sample(rs, omega, ctx.cert(),
                                                       seed * 131 + attempt);
    VectorXd yf(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) yf(i) = y[i].get_d();
    yf *= weight_scale / affine_dynamics::max_weight_value(ctx, yf);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(ctx.rep().cartan_matrix_std(yf));
    const MatrixXd a = es.eigenvectors() *
                       es.eigenvalues().array().exp().matrix().asDiagonal() *
                       es.eigenvectors().transpose();
    const MatrixXd kk = ctx.rep().random_compact(rng);
    MatrixXd gamma_n = MatrixXd::Identity(ctx.rep().dim_std(), ctx.rep().dim_std());
    const MatrixXd gamma = kk * a * kk.transpose();
    for (int i = 0; i < power; ++i) gamma_n = gamma_n * gamma;

    // candidate must be transverse to everything already accepted
    try {
      const auto e = ctx.linear_element(gamma_n);
      DynamicalSplit fwd = ctx.ideal_split(e);
      DynamicalSplit bwd = ctx.ideal_split(ctx.inverse(e));
      bool ok = true;
      auto check_pair = [&](const DynamicalSplit& s1, const DynamicalSplit& s2) {
        const double b = ctx.nondegeneracy_bound(ctx.extended_noncontracting(s1),
                                                 ctx.extended_nonexpanding(s2));
        if (!(b <= c_bound_limit)) ok = false;
      };
      check_pair(fwd, fwd);  // own attracting vs own repelling
      check_pair(bwd, bwd);
      for (std::size_t j = 0; j < linear_parts.size() && ok; ++j) {
        for (const auto* s1 : {&fwd, &bwd})
          for (const auto* s2 : {&splits_fwd[j], &splits_bwd[j]}) {
            check_pair(*s1, *s2);
            check_pair(*s2, *s1);
          }
      }
      if (!ok) continue;
      linear_parts.push_back(gamma_n);
      splits_fwd.push_back(std::move(fwd));
      splits_bwd.push_back(std::move(bwd));
    } catch (const affine_dynamics::NearDegenerateError&) {
      continue;
    } catch (const std::invalid_argument&) {
      continue;  // degenerate pair
    }
  }
  if (static_cast<int>(linear_parts.size()) < k)
    throw std::runtime_error("generator recipe failed transversality within the retry budget");

  // contraction strengths must be under the threshold (else ask for a higher
  // power)
  for (int i = 0; i < k; ++i) {
    const auto e = ctx.linear_element(linear_parts[i]);
    const double sf = ctx.affine_contraction_strength(splits_fwd[i], e);
    const double sb = ctx.affine_contraction_strength(splits_bwd[i], ctx.inverse(e));
    fam.max_s_measured = std::max({fam.max_s_measured, sf, sb});
  }
  if (fam.max_s_measured > s_threshold) throw PowerTooSmallError(fam.max_s_measured, s_threshold);

  // prescribe the Margulis invariant through the canonizing map
  const MatrixXd& vt0 = ctx.vt0_basis();
  for (int i = 0; i < k; ++i) {
    const VectorXd target = vt0 * fam.m_c;
    const VectorXd trans = splits_fwd[i].phi_rho.inverse() * target;
    fam.gens.push_back(ctx.element(linear_parts[i], trans));
  }

  // hypothesis flags, measured on the final affine generators
  fam.h1 = true;
  std::vector<DynamicalSplit> fsp, bsp;
  for (int i = 0; i < k; ++i) {
    try {
      fsp.push_back(ctx.ideal_split(fam.gens[i]));
      bsp.push_back(ctx.ideal_split(ctx.inverse(fam.gens[i])));
    } catch (const std::exception&) {
      fam.h1 = false;
      return fam;
    }
  }
  // H2: every pair (A^>~_a, A^<~_b) over generators and inverses, except
  // b = a^-1 where the two spaces coincide by construction.
  fam.c_bound = 0.0;
  for (int ai = 0; ai < 2 * k; ++ai)
    for (int bi = 0; bi < 2 * k; ++bi) {
      const int i = ai % k, j = bi % k;
      const bool a_inv = ai >= k, b_inv = bi >= k;
      if (i == j && a_inv != b_inv) continue;  // (g, g^-1)
      const DynamicalSplit& sa = a_inv ? bsp[i] : fsp[i];
      const DynamicalSplit& sb = b_inv ? bsp[j] : fsp[j];
      fam.c_bound = std::max(fam.c_bound,
                             ctx.nondegeneracy_bound(ctx.extended_noncontracting(sa),
                                                     ctx.extended_nonexpanding(sb)));
    }
  fam.h2 = fam.c_bound <= c_bound_limit;
  fam.max_s_measured = 0.0;
  for (int i = 0; i < k; ++i) {
    fam.max_s_measured = std::max(
        fam.max_s_measured, ctx.affine_contraction_strength(fsp[i], fam.gens[i]));
    fam.max_s_measured = std::max(
        fam.max_s_measured,
        ctx.affine_contraction_strength(bsp[i], ctx.inverse(fam.gens[i])));
  }
  fam.h3 = fam.max_s_measured <= s_threshold;
  fam.max_m_residual = 0.0;
  for (int i = 0; i < k; ++i) {
    const VectorXd m = ctx.margulis_invariant(fsp[i], fam.gens[i]);
    fam.max_m_residual = std::max(fam.max_m_residual, (m - fam.m_c).norm());
  }
  fam.h4 = fam.max_m_residual <= 1e-8;
  return fam;
}

GeneratorFamily sabotage(const Context& ctx, GeneratorFamily family, int index) {
  const auto split = ctx.ideal_split(ctx.linear_element(family.gens[index].std_mat));
  const VectorXd target = ctx.vt0_basis() * (-family.m_c);
  family.gens[index].trans = split.phi_rho.inverse() * target;
  family.h4 = false;  // invariants no longer all equal M_C, by construction
  return family;
}

SurveyResult word_survey(const Context& ctx, const GeneratorFamily& family, int max_len) {
  SurveyResult out;
  out.max_s_by_length.assign(max_len, 0.0);
  out.max_deviation_by_length.assign(max_len, 0.0);
  const auto words = enumerate_words(static_cast<int>(family.gens.size()), max_len,
                                     WordMode::CyclicallyReduced);
  out.rows.resize(words.size());

  // words are independent; MARGULIS_THREADS caps the worker count
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MARGULIS_THREADS")) workers = std::atoi(env);
  workers = std::clamp(workers, 1, 64);
  std::atomic<std::size_t> cursor{0};
  auto work = [&] {
    for (;;) {
      const std::size_t at = cursor.fetch_add(1);
      if (at >= words.size()) return;
      WordRecord rec;
      rec.word = words[at];
      rec.length = words[at].length();
      const AffineElement g = evaluate_word(ctx, family, words[at]);
      try {
        const DynamicalSplit split = ctx.ideal_split(g);
        rec.rho_regular = true;
        rec.s_x0 = ctx.affine_contraction_strength(split, g);
        const VectorXd m = ctx.margulis_invariant(split, g);
        rec.m_norm = m.norm();
        rec.deviation = (m - static_cast<double>(rec.length) * family.m_c).norm();
      } catch (const std::exception&) {
        rec.rho_regular = false;
      }
      out.rows[at] = std::move(rec);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (const auto& rec : out.rows) {
    if (!rec.rho_regular) {
      ++out.irregular_words;
      continue;
    }
    auto& smax = out.max_s_by_length[rec.length - 1];
    smax = std::max(smax, rec.s_x0);
    auto& dmax = out.max_deviation_by_length[rec.length - 1];
    dmax = std::max(dmax, rec.deviation);
    if (rec.length == 2) out.khat = std::max(out.khat, rec.deviation);
  }
  return out;
}

PropernessReport properness_heuristic(const Context& ctx, const GeneratorFamily& family,
                                      int max_len, int sample_points, std::uint64_t seed) {
  PropernessReport out;
  out.collapse_threshold = 0.1 * family.m_norm;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double radius = 2.0 * (1.0 + family.m_norm);
  std::vector<VectorXd> points;
  for (int i = 0; i < sample_points; ++i) {
    VectorXd p(ctx.dim_v());
    for (int j = 0; j < p.size(); ++j) p(j) = gauss(rng);
    p *= radius * std::pow(std::uniform_real_distribution<double>(0, 1)(rng),
                           1.0 / ctx.dim_v()) /
         p.norm();
    points.push_back(p);
  }

  const auto words = enumerate_words(static_cast<int>(family.gens.size()), max_len,
                                     WordMode::CyclicallyReduced);
  out.min_displacement_by_length.assign(max_len, std::numeric_limits<double>::infinity());
  out.passed = true;
  for (const auto& w : words) {
    const AffineElement g = evaluate_word(ctx, family, w);
    const MatrixXd r = ctx.rho(g.std_mat);
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& p : points) dmin = std::min(dmin, (r * p + g.trans - p).norm());
    // the displacement infimum is essentially attained on the word's own
    // ideally neutral axis
    try {
      const DynamicalSplit split = ctx.ideal_split(g);
      const VectorXd& x = split.base_point;
      dmin = std::min(dmin, (r * x + g.trans - x).norm());
    } catch (const std::exception&) {
      // a word failing rho-regularity counts as a violation
      out.passed = false;
      if (out.failing_word.empty()) out.failing_word = w.text();
    }
    auto& slot = out.min_displacement_by_length[w.length() - 1];
    slot = std::min(slot, dmin);
    if (dmin < out.collapse_threshold && out.failing_word.empty()) {
      out.passed = false;
      out.failing_word = w.text();
    }
  }
  if (!out.failing_word.empty()) out.passed = false;

  // freeness proxy: distinct reduced words act distinctly on the samples
  out.freeness_ok = true;
  const int cmp_len = std::min(max_len, 4);
  const auto reduced = enumerate_words(static_cast<int>(family.gens.size()), cmp_len,
                                       WordMode::Reduced);
  std::vector<MatrixXd> images;
  for (const auto& w : reduced) {
    const AffineElement g = evaluate_word(ctx, family, w);
    const MatrixXd r = ctx.rho(g.std_mat);
    MatrixXd img(ctx.dim_v(), points.size());
    for (std::size_t i = 0; i < points.size(); ++i) img.col(i) = r * points[i] + g.trans;
    images.push_back(std::move(img));
  }
  for (std::size_t i = 0; i < images.size() && out.freeness_ok; ++i)
    for (std::size_t j = i + 1; j < images.size(); ++j)
      if ((images[i] - images[j]).lpNorm<Eigen::Infinity>() < 1e-6) {
        out.freeness_ok = false;
        break;
      }
  return out;
}

}  // namespace margulis::group_builder
