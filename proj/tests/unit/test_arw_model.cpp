#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "rwclust/arw_model.hpp"
#include "rwclust/dataset_io.hpp"
#include "rwclust/random.hpp"

using namespace rwclust;

namespace {

ArwParams params(std::size_t p, double theta, double beta, Strength s, double a = 0.0) {
  ArwParams out;
  out.p = p;
  out.theta = theta;
  out.beta = beta;
  out.strength = s;
  out.sign_mix_a = a;
  return out;
}

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

Eigen::VectorXd as_vector(const Labels& l) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(l.size()));
  for (std::size_t i = 0; i < l.size(); ++i) v(static_cast<Eigen::Index>(i)) = l[i];
  return v;
}

}  // namespace

TEST_CASE("rng streams") {
  Rng a(derive_seed(5, StreamTag::noise, 3));
  Rng b(derive_seed(5, StreamTag::noise, 3));
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  CHECK(derive_seed(5, StreamTag::noise, 3) != derive_seed(5, StreamTag::noise, 4));
  CHECK(derive_seed(5, StreamTag::noise, 3) != derive_seed(5, StreamTag::mu, 3));
  CHECK(derive_seed(5, StreamTag::noise, 3) != derive_seed(6, StreamTag::noise, 3));

  Rng g(11);
  double sum = 0.0, sumsq = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    const double z = g.normal();
    sum += z;
    sumsq += z * z;
  }
  CHECK(std::abs(sum / draws) < 5.0 / std::sqrt(draws));
  CHECK(std::abs(sumsq / draws - 1.0) < 5.0 * std::sqrt(2.0 / draws));
}

TEST_CASE("calibrate") {
  const auto c1 = calibrate(params(10000, 0.5, 0.5, PlainStrength{0.3}));
  CHECK(c1.n == 100);
  CHECK(c1.epsilon == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(c1.expected_signals(10000) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(c1.tau == doctest::Approx(std::pow(10000.0, -0.3)).epsilon(1e-14));

  const auto c2 = calibrate(params(10000, 0.6, 0.5, LogAdjustedStrength{0.5}));
  const double expected = std::pow(10.0, -0.6) * std::pow(4.0 * 0.5 * std::log(1e4), 0.25);
  CHECK(std::abs(c2.tau - expected) < 1e-12);

  // round half up: 2^theta... p = 6, theta chosen so p^theta = 2.5
  const double theta = std::log(2.5) / std::log(6.0);
  CHECK(calibrate(params(6, theta, 0.5, PlainStrength{0.1})).n == 3);

  CHECK_THROWS_AS(calibrate(params(10, 0.1, 0.5, PlainStrength{0.1})), std::invalid_argument);  // n = 1
  CHECK_THROWS_AS(calibrate(params(100, 1.2, 0.5, PlainStrength{0.1})), std::invalid_argument);
  CHECK_THROWS_AS(calibrate(params(100, 0.5, 0.5, PlainStrength{-0.1})), std::invalid_argument);
  CHECK_THROWS_AS(calibrate(params(100, 0.5, 0.5, LogAdjustedStrength{1.5})), std::invalid_argument);
  CHECK_THROWS_AS(calibrate(params(100, 0.5, 0.5, PlainStrength{0.1}, 0.7)), std::invalid_argument);
}

TEST_CASE("gen_labels") {
  const Labels one = gen_labels(1, 42);
  CHECK((one[0] == 1 || one[0] == -1));

  const std::size_t n = 100000;
  const Labels l = gen_labels(n, 7);
  double sum = 0.0;
  for (int v : l) {
    CHECK((v == 1 || v == -1));
    sum += v;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(gen_labels(n, 7) == l);
  CHECK(gen_labels(n, 8) != l);
}

TEST_CASE("gen_mu") {
  SUBCASE("epsilon one gives all +tau") {
    const MuDraw d = gen_mu(50, 1.0, 0.7, 0.0, 3);
    CHECK(d.support.size() == 50);
    for (Eigen::Index j = 0; j < 50; ++j) CHECK(d.mu(j) == 0.7);
  }
  SUBCASE("support count is binomial") {
    const std::size_t p = 1000000;
    const double eps = 0.01;
    const MuDraw d = gen_mu(p, eps, 1.0, 0.0, 9);
    const double mean = p * eps;
    const double sd = std::sqrt(p * eps * (1 - eps));
    CHECK(std::abs(static_cast<double>(d.support.size()) - mean) < 6.0 * sd);
    for (std::size_t j : d.support) CHECK(d.mu(static_cast<Eigen::Index>(j)) == 1.0);
    CHECK(static_cast<std::size_t>((d.mu.array() != 0.0).count()) == d.support.size());
  }
  SUBCASE("balanced signs at a = 1/2") {
    const MuDraw d = gen_mu(1000000, 0.01, 2.0, 0.5, 13);
    double neg = 0.0;
    for (std::size_t j : d.support) neg += d.mu(static_cast<Eigen::Index>(j)) < 0.0;
    const double k = static_cast<double>(d.support.size());
    CHECK(std::abs(neg - k / 2.0) < 6.0 * std::sqrt(k / 4.0));
  }
  SUBCASE("prefix stability") {
    // Coordinate j depends only on (seed, j).
    const MuDraw small = gen_mu(1000, 0.1, 1.0, 0.3, 21);
    const MuDraw big = gen_mu(5000, 0.1, 1.0, 0.3, 21);
    CHECK(bitwise_equal(small.mu, big.mu.head(1000)));
  }
}

TEST_CASE("gen_dataset") {
  const ArwParams pr = params(2000, 0.6, 0.4, PlainStrength{0.2});
  const Dataset ds = gen_dataset(pr, NoiseSpec::white(), 77);
  const auto n = static_cast<Eigen::Index>(ds.n());

  SUBCASE("reproducible") {
    const Dataset again = gen_dataset(pr, NoiseSpec::white(), 77);
    CHECK(bitwise_equal(ds.X, again.X));
    CHECK(*ds.labels == *again.labels);
    CHECK(*ds.support == *again.support);
    CHECK(!bitwise_equal(ds.X, gen_dataset(pr, NoiseSpec::white(), 78).X));
  }

  SUBCASE("rank-one signal plus the stored noise") {
    const Eigen::MatrixXd Z = gen_noise(ds.n(), ds.p(), 77);
    const Eigen::MatrixXd signal = as_vector(*ds.labels) * ds.mu->transpose();
    CHECK((ds.X - Z - signal).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("noise energy concentrates at n p") {
    const Eigen::MatrixXd signal = as_vector(*ds.labels) * ds.mu->transpose();
    const double e = (ds.X - signal).squaredNorm();
    const double np = static_cast<double>(n) * 2000.0;
    CHECK(std::abs(e - np) < 6.0 * std::sqrt(2.0 * np));
  }

  SUBCASE("null signal keeps the noise") {
    const Dataset nul = gen_dataset(pr, NoiseSpec::white(), 77, {true});
    CHECK(nul.support->empty());
    CHECK(bitwise_equal(nul.X, gen_noise(ds.n(), ds.p(), 77)));
    const Eigen::VectorXd col_sq = nul.X.colwise().squaredNorm();
    CHECK(std::abs(col_sq.mean() - static_cast<double>(n)) < 6.0 * std::sqrt(2.0 * n / 2000.0));
  }

  SUBCASE("identity coloring reproduces white noise bitwise") {
    NoiseSpec c;
    c.kind = NoiseSpec::Kind::colored;
    c.A = Eigen::MatrixXd::Identity(n, n);
    c.B = Eigen::MatrixXd::Identity(2000, 2000);
    CHECK(bitwise_equal(gen_dataset(pr, c, 77).X, ds.X));
    NoiseSpec d;
    d.kind = NoiseSpec::Kind::colored;
    d.B_diag = Eigen::VectorXd::Ones(2000);
    CHECK(bitwise_equal(gen_dataset(pr, d, 77).X, ds.X));
  }

  SUBCASE("colored noise is A Z B") {
    NoiseSpec c;
    c.kind = NoiseSpec::Kind::colored;
    c.A = Eigen::MatrixXd::Identity(n, n) * 2.0;
    c.A->diagonal().head(3) << 1.0, 0.5, 3.0;
    c.B_diag = make_diagonal_coloring(2000, 5).B_diag;
    const Dataset cd = gen_dataset(pr, c, 77);
    const Eigen::MatrixXd Z = gen_noise(ds.n(), ds.p(), 77);
    const Eigen::MatrixXd expect = as_vector(*ds.labels) * ds.mu->transpose() + (*c.A) * Z * c.B_diag->asDiagonal();
    CHECK((cd.X - expect).cwiseAbs().maxCoeff() < 1e-12);
    const ConditionBounds b = condition_bounds(c);
    CHECK(b.norm_a == doctest::Approx(3.0));
    CHECK(b.norm_a_inv == doctest::Approx(2.0));
    CHECK(b.max_bound() <= std::log(2000.0) + 1e-12);
  }

  SUBCASE("dimension mismatch") {
    NoiseSpec c;
    c.kind = NoiseSpec::Kind::colored;
    c.A = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(gen_dataset(pr, c, 1), std::invalid_argument);
  }
}

TEST_CASE("sign mix zero matches the one-sided model") {
  const ArwParams one = params(3000, 0.5, 0.5, PlainStrength{0.2}, 0.0);
  const Dataset ds = gen_dataset(one, NoiseSpec::white(), 4);
  for (std::size_t j : *ds.support) CHECK((*ds.mu)(static_cast<Eigen::Index>(j)) > 0.0);
}

TEST_CASE("dataset round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "rwclust_io_test";
  std::filesystem::create_directories(dir);
  const ArwParams pr = params(300, 0.6, 0.4, LogAdjustedStrength{0.3}, 0.25);
  const Dataset ds = gen_dataset(pr, NoiseSpec::white(), 123);
  save_dataset(ds, dir / "ds");
  const Dataset back = load_dataset(dir / "ds");
  CHECK(bitwise_equal(back.X, ds.X));
  CHECK(*back.labels == *ds.labels);
  CHECK(*back.support == *ds.support);
  CHECK(bitwise_equal(*back.mu, *ds.mu));
  CHECK(back.seed == 123);
  CHECK(back.params->p == 300);
  CHECK(std::get<LogAdjustedStrength>(back.params->strength).r == 0.3);

  SUBCASE("shortest round-trip formatting") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 5e-324}) {
      CHECK(parse_double_field(format_double(v), "t") == v);
    }
    CHECK(format_double(0.1) == "0.1");
  }

  SUBCASE("malformed csv names the line and field") {
    {
      std::ofstream bad(dir / "bad.csv");
      bad << "1,2,3\n4,x5,6\n";
    }
    try {
      read_matrix_csv(dir / "bad.csv");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(":2 field 2") != std::string::npos);
    }
    {
      std::ofstream ragged(dir / "ragged.csv");
      ragged << "1,2,3\n4,5\n";
    }
    CHECK_THROWS_AS(read_matrix_csv(dir / "ragged.csv"), ParseError);
  }
  std::filesystem::remove_all(dir);
}
