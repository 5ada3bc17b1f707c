#include <doctest.h>

#include <json.hpp>

#include "invartest/verifiers.hpp"
#include "test_util.hpp"

using namespace invartest;
using test_util::max_abs_diff;

namespace {

VerifierConfig small_cfg(std::uint64_t seed, long trials, Index dim,
                         Index split) {
  VerifierConfig cfg;
  cfg.seed = seed;
  cfg.trials = trials;
  cfg.dim = dim;
  cfg.split = split;
  return cfg;
}

}  // namespace

TEST_SUITE("verifiers") {

TEST_CASE("config validation") {
  VerifierConfig cfg = small_cfg(1, 0, 3, 1);
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = small_cfg(1, 10, 3, 3);
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = small_cfg(1, 10, 3, 1);
  cfg.tol = 0.0;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg.tol = 1e-8;
  cfg.step = 0.7;
  CHECK_THROWS_AS(validate(cfg), Error);
}

TEST_CASE("lemma ids round-trip through their names") {
  for (LemmaId id :
       {LemmaId::L1BplusConvex, LemmaId::L2Penrose, LemmaId::L4BConcave,
        LemmaId::L6QuadConvex, LemmaId::Eq28Chain, LemmaId::Eq29Chain,
        LemmaId::Thm1AuConvex, LemmaId::T2RegionConvex,
        LemmaId::WRegionNonconvex}) {
    const auto parsed = parse_lemma_id(to_string(id));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == id);
  }
  CHECK_FALSE(parse_lemma_id("NOT_A_LEMMA").has_value());
}

TEST_CASE("penrose suite passes and respects tolerance monotonicity") {
  VerifierConfig cfg = small_cfg(42, 500, 4, 2);
  cfg.tol = 1e-9;
  const VerifierReport rep = verify_penrose(cfg);
  CHECK(rep.verdict == Verdict::Pass);
  CHECK(rep.worst_violation >= -1e-9);
  CHECK(rep.trials_run == 500);

  cfg.tol = 2e-9;  // doubling tol never flips PASS to FAIL
  CHECK(verify_penrose(cfg).verdict == Verdict::Pass);
}

TEST_CASE("reports are deterministic given the config") {
  const VerifierConfig cfg = small_cfg(7, 200, 3, 1);
  const std::string a = to_json_line(verify_bplus_convex(cfg));
  const std::string b = to_json_line(verify_bplus_convex(cfg));
  CHECK(a == b);

  const std::string c = to_json_line(run_verifier(LemmaId::Eq29Chain, cfg));
  const std::string d = to_json_line(run_verifier(LemmaId::Eq29Chain, cfg));
  CHECK(c == d);
}

TEST_CASE("reports are identical for any worker count") {
  for (LemmaId id : {LemmaId::L1BplusConvex, LemmaId::L2Penrose,
                     LemmaId::Thm1AuConvex, LemmaId::WRegionNonconvex}) {
    VerifierConfig cfg = small_cfg(13, 300, 3, 1);
    cfg.threads = 1;
    const std::string serial = to_json_line(run_verifier(id, cfg));
    cfg.threads = 4;
    CHECK(serial == to_json_line(run_verifier(id, cfg)));
  }
}

TEST_CASE("json lines parse and carry the contract fields") {
  const VerifierConfig cfg = small_cfg(3, 50, 3, 1);
  for (LemmaId id : {LemmaId::L2Penrose, LemmaId::WRegionNonconvex}) {
    const auto j = nlohmann::json::parse(to_json_line(run_verifier(id, cfg)));
    CHECK(j.contains("lemma_id"));
    CHECK(j.contains("seed"));
    CHECK(j.contains("trials"));
    CHECK(j.contains("worst_violation"));
    CHECK(j.contains("tol"));
    CHECK(j.contains("verdict"));
    CHECK(j.at("seed").get<std::uint64_t>() == 3);
  }
}

TEST_CASE("chord margin vanishes on a constant segment") {
  // s == t makes the segment constant, so the chord difference is zero.
  SplitMix64 rng(99);
  const Matrix s = test_util::rand_pd(rng, 3);
  const PartitionedSpdMatrix ps(s, 1);
  const Matrix bp = adjusted_precision(ps);
  const LoewnerReport rep = loewner_compare(bp, bp);
  CHECK(rep.min_eig == 0.0);
  CHECK(rep.verdict == LoewnerVerdict::Psd);
}

TEST_CASE("diagonal family: convexity margin reduces to scalar 1/x") {
  // On diagonal scatters the adjusted precision is diag(1/s11, 0), so the
  // chord inequality is the scalar convexity of 1/x.
  Matrix s = Matrix::Zero(2, 2), t = Matrix::Zero(2, 2);
  s.diagonal() << 1, 1;
  t.diagonal() << 4, 1;
  const PartitionedSpdMatrix ps(s, 1), pt(t, 1);
  const Matrix comb =
      0.5 * adjusted_precision(ps) + 0.5 * adjusted_precision(pt);
  const PartitionedSpdMatrix mid(Matrix(0.5 * s + 0.5 * t), 1);
  CHECK(comb(0, 0) == doctest::Approx(0.625).epsilon(1e-14));
  CHECK(adjusted_precision(mid)(0, 0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(loewner_compare(comb, adjusted_precision(mid)).verdict ==
        LoewnerVerdict::Psd);
}

TEST_CASE("diagonal family: pseudo-inverse map is linear, margin exactly 0") {
  Matrix s = Matrix::Zero(2, 2), t = Matrix::Zero(2, 2);
  s.diagonal() << 1, 1;
  t.diagonal() << 4, 1;
  const PartitionedSpdMatrix ps(s, 1), pt(t, 1);
  const Matrix comb =
      0.5 * adjusted_precision_pinv(ps) + 0.5 * adjusted_precision_pinv(pt);
  const PartitionedSpdMatrix mid(Matrix(0.5 * s + 0.5 * t), 1);
  CHECK(max_abs_diff(comb, adjusted_precision_pinv(mid)) < 1e-14);
}

TEST_CASE("an explicit counterexample defeats the convexity claim") {
  // The chord test fails decisively on this pair, and the scalar curvature
  // along the offending eigendirection agrees in sign.
  Matrix s = Matrix::Identity(2, 2);
  Matrix t(2, 2);
  t << 19, 9, 9, 6;
  const PartitionedSpdMatrix ps(s, 1), pt(t, 1);
  const Matrix comb =
      0.5 * adjusted_precision(ps) + 0.5 * adjusted_precision(pt);
  const PartitionedSpdMatrix mid(Matrix(0.5 * (s + t)), 1);
  const LoewnerReport rep = loewner_compare(comb, adjusted_precision(mid));
  CHECK(rep.verdict == LoewnerVerdict::NotPsd);
  CHECK(rep.min_eig < -0.1);

  Eigen::SelfAdjointEigenSolver<Matrix> es(comb - adjusted_precision(mid));
  const Vector v = es.eigenvectors().col(0);
  auto f = [&](double u) {
    const PartitionedSpdMatrix seg(Matrix((1.0 - u) * s + u * t), 1);
    return v.dot(adjusted_precision(seg) * v);
  };
  const double h = 1e-3;
  const double d2 = (f(0.5 + h) - 2.0 * f(0.5) + f(0.5 - h)) / (h * h);
  CHECK(d2 < -0.1);
}

TEST_CASE("rank obstruction defeats the concavity claim on generic pairs") {
  // Mixtures of the rank-p1 pseudo-inverse kernels pick up rank 2*p1 as soon
  // as the regression blocks differ, so no rank-p1 matrix can dominate them.
  Matrix s(2, 2), t(2, 2);
  s << 2, 1, 1, 1;
  t << 1, 0, 0, 1;
  const PartitionedSpdMatrix ps(s, 1), pt(t, 1);
  const Matrix comb =
      0.5 * adjusted_precision_pinv(ps) + 0.5 * adjusted_precision_pinv(pt);
  CHECK(symmetric_rank(comb) == 2);
  const PartitionedSpdMatrix mid(Matrix(0.5 * (s + t)), 1);
  CHECK(symmetric_rank(adjusted_precision_pinv(mid)) == 1);
  const LoewnerReport rep =
      loewner_compare(adjusted_precision_pinv(mid), comb);
  CHECK(rep.verdict == LoewnerVerdict::NotPsd);
}

TEST_CASE("randomized chord suites report the violations they find") {
  const VerifierConfig cfg = small_cfg(2024, 1000, 3, 1);
  const VerifierReport l1 = verify_bplus_convex(cfg);
  CHECK(l1.verdict == Verdict::Fail);
  CHECK(l1.worst_violation < -1e-4);
  CHECK_FALSE(l1.witness.empty());
  // Scalar curvature cross-check detects the same failure.
  CHECK(l1.scalar_worst < -1e-4);

  const VerifierReport l4 = verify_b_concave(cfg);
  CHECK(l4.verdict == Verdict::Fail);
  CHECK(l4.worst_violation < -1e-4);
  CHECK_FALSE(l4.witness.empty());
}

TEST_CASE("scalar chain equalities at degenerate draws") {
  // x == y and s == t collapse the chain to equalities.
  SplitMix64 rng(17);
  const Matrix s = test_util::rand_pd(rng, 3);
  const Vector x = test_util::rand_vec(rng, 3);
  const PartitionedSpdMatrix ps(s, 1);
  const double q = x.dot(adjusted_precision(ps) * x);
  const Matrix pinv_mix = pseudo_inverse(adjusted_precision_pinv(ps));
  const double q_mid = x.dot(pinv_mix * x);
  CHECK(q == doctest::Approx(q_mid).epsilon(1e-9));
}

TEST_CASE("quad-convexity suite passes on compatible inputs") {
  const VerifierConfig cfg = small_cfg(5, 500, 4, 2);
  const VerifierReport rep = verify_quad_convex(cfg);
  CHECK(rep.verdict == Verdict::Pass);
  CHECK(rep.worst_violation >= -cfg.tol);
}

TEST_CASE("omnibus region convexity holds where the adjusted one fails") {
  VerifierConfig cfg = small_cfg(31, 1500, 3, 1);
  cfg.tol = 1e-10;
  const VerifierReport t2 = verify_region_convex(cfg, Region::T2);
  CHECK(t2.verdict == Verdict::Pass);
  CHECK(t2.trials_run > 0);

  VerifierConfig cfg_u = small_cfg(31, 4000, 3, 1);
  cfg_u.tol = 1e-10;
  const VerifierReport au = verify_region_convex(cfg_u, Region::U);
  CHECK(au.verdict == Verdict::Fail);
  CHECK_FALSE(au.witness.empty());
}

TEST_CASE("ratio-statistic region: canonical witness is always found") {
  const VerifierConfig cfg = small_cfg(11, 100, 3, 1);
  const VerifierReport rep = find_w_nonconvexity(cfg);
  CHECK(rep.verdict == Verdict::WitnessFound);
  CHECK(rep.witness.find("\"canonical_found\":true") != std::string::npos);
  const auto j = nlohmann::json::parse(rep.witness);
  CHECK(j.at("canonical").at("w_mid").get<double>() ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(j.at("witnesses").get<long>() >= 1);
}

TEST_CASE("ratio-statistic region: a huge threshold disables the canonical pair") {
  const VerifierConfig cfg = small_cfg(11, 50, 2, 1);
  const VerifierReport rep = find_w_nonconvexity(cfg, 50.0);
  CHECK(rep.witness.find("\"canonical_found\":false") != std::string::npos);
}

}  // TEST_SUITE
