#include "margulis/commands.hpp"

#include <chrono>
#include <functional>
#include <fstream>
#include <sstream>

namespace margulis::commands {

using nlohmann::json;

namespace {

json rv_to_json(const RatVec& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(rat_to_string(x));
  return a;
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

RatVec parse_rational_vector(const std::string& s) {
  RatVec out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(rat_from_string(item));
  return out;
}

Tolerances g_tolerances;

json skeleton(const std::string& command, std::uint64_t seed) {
  json j;
  j["schema_version"] = 1;
  j["command"] = command;
  j["seed"] = seed;
  j["tolerances"] = g_tolerances.to_json();
  return j;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

struct ResolvedQuery {
  root_system::RootSystemData rs;
  rep_weights::WeightSet omega;
  bool split_multiplicities = false;
};

ResolvedQuery resolve(const RepQuery& q) {
  ResolvedQuery out;
  out.rs = root_system::build_root_system(q.family, q.rank);
  int ways = (q.highest ? 1 : 0) + (q.sym >= 0 ? 1 : 0) + (q.wedge >= 0 ? 1 : 0) +
             (q.adjoint ? 1 : 0);
  if (ways != 1)
    throw std::invalid_argument("specify exactly one of --highest, --sym, --wedge, --adjoint");
  const bool reduced = out.rs.family != root_system::Family::BC;
  if (q.adjoint) {
    out.omega = rep_weights::adjoint_weight_set(out.rs);
    out.split_multiplicities = reduced;
    return out;
  }
  RatVec pi_coords = rv_zero(out.rs.rank);
  if (q.highest) {
    if (static_cast<int>(q.highest->size()) != out.rs.rank)
      throw std::invalid_argument("--highest needs one integer per fundamental weight");
    for (int i = 0; i < out.rs.rank; ++i) pi_coords[i] = (*q.highest)[i];
  } else if (q.sym >= 0) {
    if (out.rs.family != root_system::Family::A)
      throw std::invalid_argument("--sym applies to family A (SL) only");
    pi_coords[0] = q.sym;
  } else {
    if (out.rs.family != root_system::Family::A)
      throw std::invalid_argument("--wedge applies to family A (SL) only");
    if (q.wedge < 1 || q.wedge > out.rs.rank)
      throw std::invalid_argument("--wedge degree out of range");
    pi_coords[q.wedge - 1] = 1;
  }
  const RatVec highest = out.rs.weight_from_pi_coords(pi_coords);
  if (reduced) {
    out.omega = rep_weights::multiplicities_split(out.rs, highest);
    out.split_multiplicities = true;
  } else {
    out.omega = rep_weights::weight_set(out.rs, highest);
  }
  return out;
}

affine_dynamics::Context make_context(const std::string& tag, std::uint64_t x0_seed = 1) {
  auto ctx = affine_dynamics::Context::make(fixture_from_tag(tag), x0_seed);
  affine_dynamics::NumericTolerances tol;
  tol.cluster = g_tolerances.cluster;
  tol.leakage = g_tolerances.leakage;
  tol.jordan = g_tolerances.jordan;
  tol.margulis_independence = g_tolerances.margulis_independence;
  ctx.set_tolerances(tol);
  return ctx;
}

json margulis_data_json(const affine_dynamics::MargulisData& d) {
  json j;
  j["jd"] = vec_to_json(d.jd);
  j["ct"] = vec_to_json(d.ct);
  j["margulis_invariant"] = vec_to_json(d.m);
  j["s_x0"] = d.s_x0_fwd;
  j["s_x0_inverse"] = d.s_x0_bwd;
  j["nondegeneracy_bound"] = d.nondeg_bound;
  return j;
}

}  // namespace

void set_tolerances(const Tolerances& tol) { g_tolerances = tol; }

const Tolerances& tolerances() { return g_tolerances; }

json Tolerances::to_json() const {
  json j;
  j["svd_rank"] = svd_rank;
  j["cluster"] = cluster;
  j["jordan"] = jordan;
  j["leakage"] = leakage;
  j["margulis_independence"] = margulis_independence;
  return j;
}

concrete_rep::RepSpec fixture_from_tag(const std::string& tag) {
  using concrete_rep::GroupFamily;
  using concrete_rep::RepKind;
  concrete_rep::RepSpec spec;
  auto parse_suffix = [&](const std::string& rest) {
    if (rest.empty() || rest == "standard") {
      spec.kind = RepKind::Standard;
    } else if (rest == "adjoint") {
      spec.kind = RepKind::Adjoint;
    } else if (rest == "trivial") {
      spec.kind = RepKind::Sym;
      spec.degree = 0;
    } else if (rest.rfind("sym", 0) == 0) {
      spec.kind = RepKind::Sym;
      spec.degree = std::stoi(rest.substr(3));
    } else if (rest.rfind("wedge", 0) == 0) {
      spec.kind = RepKind::Wedge;
      spec.degree = std::stoi(rest.substr(5));
    } else {
      throw std::invalid_argument("unknown representation suffix: " + rest);
    }
  };
  std::string head = tag, rest;
  if (const auto pos = tag.find('_'); pos != std::string::npos) {
    head = tag.substr(0, pos);
    rest = tag.substr(pos + 1);
  }
  if (head.rfind("sl", 0) == 0) {
    spec.group = GroupFamily::SL;
    spec.n = std::stoi(head.substr(2));
  } else if (head.rfind("so", 0) == 0) {
    const std::string digits = head.substr(2);
    if (digits.size() != 2 || digits[0] - digits[1] != 1)
      throw std::invalid_argument("SO fixtures have signature (p+1, p), e.g. so21, so32, so43");
    spec.group = GroupFamily::SOpq;
    spec.n = digits[1] - '0';
  } else {
    throw std::invalid_argument("unknown fixture tag: " + tag);
  }
  parse_suffix(rest);
  if (spec.group == GroupFamily::SOpq &&
      !(spec.kind == RepKind::Standard || spec.kind == RepKind::Adjoint))
    throw std::invalid_argument("SO fixtures support standard and adjoint representations");
  return spec;
}

Result classify_rep(const RepQuery& q) {
  Timer timer;
  Result res;
  res.report = skeleton("classify-rep", 0);
  const ResolvedQuery rq = resolve(q);
  const auto rc = rep_weights::classify(rq.rs, rq.omega);
  json& out = res.report["results"];
  out["family"] = q.family;
  out["rank"] = q.rank;
  out["weight_count"] = rq.omega.weights.size();
  if (rq.split_multiplicities) {
    out["dimension"] = rq.omega.dimension();
    out["zero_weight_multiplicity"] = rq.omega.multiplicity(rv_zero(rq.rs.ambient_dim));
  }
  out["zero_is_weight"] = rc.zero_is_weight;
  out["limited"] = rc.limited;
  out["abundant"] = rc.abundant;
  out["awkward"] = rc.awkward;
  out["swinging"] = rc.swinging;
  out["omega_w0"] = json::array();
  for (const auto& w : rc.omega_w0) out["omega_w0"].push_back(rv_to_json(w));
  if (const auto check = rep_weights::roots_in_weights_check(rq.rs, rq.omega))
    out["roots_subset_of_weights"] = *check;
  res.report["timing_ms"] = timer.ms();
  return res;
}

namespace {

json certificate_json(const root_system::RootSystemData& rs,
                      const x0_select::X0Certificate& cert) {
  json j;
  j["x0"] = rv_to_json(cert.x0);
  j["symmetric"] = cert.symmetric;
  j["generically_symmetric"] = cert.generically_symmetric;
  j["extreme"] = cert.extreme;
  json part;
  for (const char* key : {"gt", "eq", "lt"}) part[key] = json::array();
  for (const auto& w : cert.partition.gt) part["gt"].push_back(rv_to_json(w));
  for (const auto& w : cert.partition.eq) part["eq"].push_back(rv_to_json(w));
  for (const auto& w : cert.partition.lt) part["lt"].push_back(rv_to_json(w));
  j["partition"] = part;
  j["pi_x0"] = json::array();
  for (const auto& a : cert.pi_x0) j["pi_x0"].push_back(rv_to_json(a));
  j["w_x0_generator_words"] = json::array();
  for (const auto& w : cert.w_x0_generators) j["w_x0_generator_words"].push_back(w.word);
  json pairs = json::object();
  for (const auto& [i, pr] : cert.pairs_weak) {
    json e;
    e["alpha"] = rv_to_json(rs.simple_roots[i]);
    e["upper"] = rv_to_json(pr.first);
    e["lower"] = rv_to_json(pr.second);
    pairs["weak_" + std::to_string(i + 1)] = e;
  }
  for (const auto& [i, pr] : cert.pairs_strong) {
    json e;
    e["alpha"] = rv_to_json(rs.simple_roots[i]);
    e["upper"] = rv_to_json(pr.first);
    e["lower"] = rv_to_json(pr.second);
    pairs["strong_" + std::to_string(i + 1)] = e;
  }
  j["pairs"] = pairs;
  return j;
}

}  // namespace

Result find_x0(const RepQuery& q, std::uint64_t seed,
               const std::optional<std::string>& check_vector) {
  Timer timer;
  Result res;
  res.report = skeleton("find-x0", seed);
  const ResolvedQuery rq = resolve(q);
  try {
    x0_select::X0Certificate cert;
    if (check_vector) {
      const RatVec x0 = parse_rational_vector(*check_vector);
      if (static_cast<int>(x0.size()) != rq.rs.ambient_dim)
        throw std::invalid_argument("--check vector has the wrong dimension");
      cert = x0_select::make_certificate(rq.rs, rq.omega, x0);
    } else {
      cert = x0_select::select_x0(rq.rs, rq.omega, seed);
    }
    res.report["results"] = certificate_json(rq.rs, cert);
    res.report["results"]["root_system"] = root_system::to_json(rq.rs);
  } catch (const x0_select::TrivialRepresentationError& e) {
    res.report["results"]["error"] = e.what();
    res.exit_code = kNotApplicable;
  }
  res.report["timing_ms"] = timer.ms();
  return res;
}

Result check_criterion(const std::string& fixture_tag) {
  Timer timer;
  Result res;
  res.report = skeleton("check-criterion", 0);
  const auto rep = concrete_rep::ConcreteRep::realize(fixture_from_tag(fixture_tag));
  const auto crit = concrete_rep::check_criterion(rep, g_tolerances.svd_rank);
  json& out = res.report["results"];
  out["fixture"] = rep.spec().name();
  out["dim_v"] = rep.dim_v();
  out["v0_dim"] = crit.v0_dim;
  out["vt0_dim"] = crit.vt0_dim;
  out["criterion"] = crit.moved_by_w0;
  if (crit.moved_by_w0) {
    out["witness"] = vec_to_json(crit.witness);
    out["witness_residual"] = crit.witness_residual;
  }
  res.exit_code = crit.moved_by_w0 ? kPass : kViolation;
  res.report["timing_ms"] = timer.ms();
  return res;
}

Result margulis_report(const std::string& fixture_tag,
                       const std::optional<std::string>& elements_path, int random_count,
                       std::uint64_t seed) {
  Timer timer;
  Result res;
  res.report = skeleton("margulis", seed);
  auto ctx = make_context(fixture_tag);
  std::vector<affine_dynamics::AffineElement> elements;
  if (elements_path) {
    if (ctx.rep().spec().kind != concrete_rep::RepKind::Standard)
      throw std::invalid_argument("element files require a standard-representation fixture");
    std::ifstream in(*elements_path);
    if (!in) throw std::invalid_argument("cannot open element file: " + *elements_path);
    json j;
    in >> j;
    const int d = ctx.rep().dim_std();
    for (const auto& entry : j) {
      if (static_cast<int>(entry.size()) != (d + 1) * (d + 1))
        throw std::invalid_argument("element entries must hold (d+1)^2 row-major floats");
      Eigen::MatrixXd ext(d + 1, d + 1);
      for (int r = 0; r < d + 1; ++r)
        for (int c = 0; c < d + 1; ++c) ext(r, c) = entry[r * (d + 1) + c].get<double>();
      const Eigen::MatrixXd lin = ext.topLeftCorner(d, d);
      if (!ctx.rep().in_group(lin, 1e-6))
        throw std::invalid_argument("element linear part is not in the group");
      elements.push_back(ctx.element(lin, ext.topRightCorner(d, 1)));
    }
  } else {
    const auto pairs = affine_dynamics::sample_regular_pairs(ctx, (random_count + 1) / 2, 2, seed);
    for (const auto& [a, b] : pairs) {
      elements.push_back(a);
      if (static_cast<int>(elements.size()) < random_count) elements.push_back(b);
    }
  }
  json rows = json::array();
  double max_inverse_defect = 0.0;
  const Eigen::MatrixXd w0t = ctx.w0_on_t();
  for (const auto& g : elements) {
    json row;
    try {
      const auto data = ctx.margulis_data(g);
      row = margulis_data_json(data);
      const auto gi = ctx.inverse(g);
      const Eigen::VectorXd mi = ctx.margulis_invariant(ctx.ideal_split(gi), gi);
      const double defect = (mi + w0t * data.m).norm();
      row["inverse_identity_defect"] = defect;
      max_inverse_defect = std::max(max_inverse_defect, defect);
    } catch (const std::exception& e) {
      row["error"] = e.what();
    }
    rows.push_back(row);
  }
  res.report["results"]["fixture"] = ctx.rep().spec().name();
  res.report["results"]["elements"] = rows;
  res.report["results"]["max_inverse_identity_defect"] = max_inverse_defect;
  res.exit_code = max_inverse_defect <= 1e-6 ? kPass : kViolation;
  res.report["timing_ms"] = timer.ms();
  return res;
}

Result additivity(const std::string& fixture_tag, int trials, const std::vector<int>& powers,
                  std::uint64_t seed, const std::optional<std::string>& csv_path) {
  Timer timer;
  Result res;
  res.report = skeleton("additivity", seed);
  auto ctx = make_context(fixture_tag);
  const auto stats = affine_dynamics::additivity_experiment(ctx, trials, powers, seed);
  json rows = json::array();
  std::ostringstream csv;
  csv << "trial,power,dev_m,m_norm,max_trapezoid,product_rho_regular\n";
  for (const auto& r : stats.rows) {
    json row;
    row["trial"] = r.trial;
    row["power"] = r.power;
    row["dev_m"] = r.dev_m;
    row["m_norm"] = r.m_norm_g;
    row["max_trapezoid"] = r.max_trapezoid;
    row["product_rho_regular"] = r.product_rho_regular;
    rows.push_back(row);
    csv << r.trial << ',' << r.power << ',' << r.dev_m << ',' << r.m_norm_g << ','
        << r.max_trapezoid << ',' << (r.product_rho_regular ? 1 : 0) << '\n';
  }
  if (csv_path) {
    std::ofstream out(*csv_path);
    out << csv.str();
  }
  res.report["results"]["fixture"] = ctx.rep().spec().name();
  res.report["results"]["rows"] = rows;
  res.report["results"]["max_dev_m"] = stats.max_dev_m;
  res.report["results"]["max_trapezoid"] = stats.max_trapezoid;
  res.report["results"]["irregular_products"] = stats.irregular_products;
  res.report["timing_ms"] = timer.ms();
  return res;
}

namespace {

json family_json(const group_builder::GeneratorFamily& fam) {
  json j;
  j["k"] = fam.gens.size();
  j["power"] = fam.power_used;
  j["m_c"] = vec_to_json(fam.m_c);
  j["m_norm"] = fam.m_norm;
  j["c_bound"] = fam.c_bound;
  j["max_s"] = fam.max_s_measured;
  j["max_m_residual"] = fam.max_m_residual;
  j["h1_rho_regular"] = fam.h1;
  j["h2_nondegenerate"] = fam.h2;
  j["h3_contracting"] = fam.h3;
  j["h4_prescribed_invariant"] = fam.h4;
  j["passes"] = fam.passes();
  return j;
}

}  // namespace

Result build_group(const std::string& fixture_tag, int k, int power, double m_norm,
                   double s_threshold, std::uint64_t seed) {
  Timer timer;
  Result res;
  res.report = skeleton("build-group", seed);
  auto ctx = make_context(fixture_tag);
  const auto fam = group_builder::build_family(ctx, k, power, m_norm, s_threshold, seed);
  res.report["results"] = family_json(fam);
  res.report["results"]["fixture"] = ctx.rep().spec().name();
  res.exit_code = fam.passes() ? kPass : kViolation;
  res.report["timing_ms"] = timer.ms();
  return res;
}

Result word_survey(const std::string& fixture_tag, int k, int power, double m_norm,
                   double s_threshold, int max_len, std::uint64_t seed,
                   const std::optional<std::string>& csv_path) {
  Timer timer;
  Result res;
  res.report = skeleton("word-survey", seed);
  auto ctx = make_context(fixture_tag);
  const auto fam = group_builder::build_family(ctx, k, power, m_norm, s_threshold, seed);
  const auto survey = group_builder::word_survey(ctx, fam, max_len);

  std::ostringstream csv;
  csv << "word,length,s_x0,m_norm,deviation\n";
  for (const auto& r : survey.rows)
    csv << r.word.text() << ',' << r.length << ',' << r.s_x0 << ',' << r.m_norm << ','
        << r.deviation << '\n';
  if (csv_path) {
    std::ofstream out(*csv_path);
    out << csv.str();
  }

  bool pass = fam.passes() && survey.irregular_words == 0;
  // geometric contraction decay beyond the length-2 anchor, and deviations
  // growing at most linearly against twice the measured length-2 defect
  const double anchor =
      max_len >= 2 ? std::max(survey.max_s_by_length[0], survey.max_s_by_length[1])
                   : survey.max_s_by_length[0];
  if (anchor >= 1.0) pass = false;
  for (int l = 1; l <= max_len && pass; ++l) {
    if (l >= 3 && survey.max_s_by_length[l - 1] > anchor * std::pow(2.0, -(l - 2))) pass = false;
    if (l >= 2 && survey.max_deviation_by_length[l - 1] > (l - 1) * 2.0 * survey.khat + 1e-12)
      pass = false;
  }
  json& out = res.report["results"];
  out["fixture"] = ctx.rep().spec().name();
  out["family"] = family_json(fam);
  out["word_count"] = survey.rows.size();
  out["irregular_words"] = survey.irregular_words;
  out["max_s_by_length"] = survey.max_s_by_length;
  out["max_deviation_by_length"] = survey.max_deviation_by_length;
  out["khat"] = survey.khat;
  out["pass"] = pass;
  if (!csv_path) out["csv"] = csv.str();
  res.exit_code = pass ? kPass : kViolation;
  res.report["timing_ms"] = timer.ms();
  return res;
}

std::string render_text(const json& report) {
  std::ostringstream out;
  out << "command: " << report.value("command", "?") << "\n";
  out << "seed:    " << report.value("seed", 0ULL) << "\n";
  std::function<void(const json&, int)> walk = [&](const json& j, int indent) {
    const std::string pad(indent, ' ');
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        out << pad << key << ":\n";
        walk(value, indent + 2);
      } else if (value.is_array() && value.size() > 8) {
        out << pad << key << ": [" << value.size() << " entries]\n";
      } else {
        out << pad << key << ": " << value.dump() << "\n";
      }
    }
  };
  if (report.contains("results")) walk(report["results"], 2);
  return out.str();
}

}  // namespace margulis::commands
