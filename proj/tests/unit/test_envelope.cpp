#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "swbf/envelope.hpp"
#include "swbf/error.hpp"
#include "swbf/rng.hpp"

using namespace swbf;
using cd = std::complex<double>;

namespace {

std::vector<cd> naive_dft(const std::vector<cd>& x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd s = 0;
    for (std::size_t j = 0; j < n; ++j) {
      s += x[j] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * j) / static_cast<double>(n));
    }
    out[k] = s;
  }
  return out;
}

BModeImage image(std::initializer_list<double> values) {
  BModeImage img;
  img.db.resize(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) img.db(0, i++) = v;
  return img;
}

}  // namespace

TEST_CASE("fft small vectors") {
  const std::vector<cd> delta{1, 0, 0, 0};
  for (const auto& v : fft(delta)) CHECK(std::abs(v - cd(1, 0)) < 1e-15);
  const std::vector<cd> ones{1, 1, 1, 1};
  const auto f = fft(ones);
  CHECK(std::abs(f[0] - cd(4, 0)) < 1e-15);
  for (std::size_t k = 1; k < 4; ++k) CHECK(std::abs(f[k]) < 1e-15);
}

TEST_CASE("fft matches the direct DFT and inverts") {
  Rng rng(8);
  for (std::size_t n : {1u, 2u, 16u, 64u}) {
    std::vector<cd> x(n);
    for (auto& v : x) v = cd(rng.normal(), rng.normal());
    const auto f = fft(x);
    const auto d = naive_dft(x);
    double norm = 0;
    for (const auto& v : x) norm = std::max(norm, std::abs(v));
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(f[k] - d[k]) < 1e-10 * (1.0 + std::abs(d[k])));
    const auto back = ifft(f);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(back[k] - x[k]) < 1e-10 * norm);
  }
}

TEST_CASE("fft rejects other lengths") {
  const std::vector<cd> x(12);
  try {
    fft(x);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LengthNotPowerOfTwo);
  }
  CHECK_THROWS_AS(ifft(std::vector<cd>(6)), Error);
}

TEST_CASE("envelope of a pure tone") {
  const std::size_t n = 500;
  const double amp = 2.5;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::cos(2.0 * std::numbers::pi * 0.1 * static_cast<double>(i));
  const auto env = hilbert_envelope(x);
  REQUIRE(env.size() == n);
  for (std::size_t i = n / 20; i < n - n / 20; ++i) CHECK(std::abs(env[i] - amp) < 0.02 * amp);
}

TEST_CASE("envelope symmetries") {
  Rng rng(2);
  std::vector<double> x(100), neg(100), scaled(100);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    neg[i] = -x[i];
    scaled[i] = 3.5 * x[i];
  }
  const auto e = hilbert_envelope(x);
  const auto en = hilbert_envelope(neg);
  const auto es = hilbert_envelope(scaled);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(e[i] >= 0.0);
    CHECK(en[i] == doctest::Approx(e[i]).epsilon(1e-12));
    CHECK(std::abs(es[i] - 3.5 * e[i]) <= 1e-12 * (1.0 + es[i]));
  }
  for (double v : hilbert_envelope(std::vector<double>(37, 0.0))) CHECK(v == 0.0);
}

TEST_CASE("envelope image is transposed to depth rows") {
  Matrix rf = Matrix::Zero(3, 32);
  rf(1, 10) = 1.0;
  const Matrix env = envelope_image(rf);
  CHECK(env.rows() == 32);
  CHECK(env.cols() == 3);
  CHECK(env.col(0).cwiseAbs().maxCoeff() == 0.0);
  Eigen::Index r = 0;
  env.col(1).maxCoeff(&r);
  CHECK(r == 10);
}

TEST_CASE("log compression") {
  Matrix env(1, 4);
  env << 8.0, 0.8, 4.0, 0.0;
  const auto img = log_compress(env);
  CHECK(img.reference_max == 8.0);
  CHECK(img.db(0, 0) == 0.0);
  CHECK(img.db(0, 1) == doctest::Approx(-20.0).epsilon(1e-12));
  CHECK(img.db(0, 2) == doctest::Approx(-6.0206).epsilon(1e-5));
  CHECK(img.db(0, 3) == doctest::Approx(-200.0).epsilon(1e-12));

  const auto scaled = log_compress(env * 123.0);
  CHECK((scaled.db - img.db).cwiseAbs().maxCoeff() == 0.0);

  const auto zero = log_compress(Matrix::Zero(2, 3));
  CHECK(zero.reference_max == 0.0);
  CHECK(zero.db.cwiseAbs().maxCoeff() == 0.0);

  Matrix negative(1, 1);
  negative << -1.0;
  CHECK_THROWS_AS(log_compress(negative), Error);
}

TEST_CASE("display threshold clamps to the range") {
  const auto out = display_threshold(image({-30.0, -75.0, 3.0}), 60.0);
  CHECK(out.db(0, 0) == -30.0);
  CHECK(out.db(0, 1) == -60.0);
  CHECK(out.db(0, 2) == 0.0);
}

TEST_CASE("pgm rendering") {
  BModeImage img;
  img.db.resize(2, 3);
  img.db << 0.0, -60.0, -30.0, -15.0, -45.0, -59.9;
  const std::string pgm = render_pgm(img, 60.0);
  const std::string header = "P5\n3 2\n255\n";
  REQUIRE(pgm.substr(0, header.size()) == header);
  REQUIRE(pgm.size() == header.size() + 6);
  const auto px = [&](std::size_t i) { return static_cast<unsigned char>(pgm[header.size() + i]); };
  CHECK(px(0) == 255);
  CHECK(px(1) == 0);
  CHECK(px(2) == 128);
  CHECK(px(3) == 191);  // 191.25
  CHECK(px(4) == 64);   // 63.75
  CHECK(px(5) == 0);    // 0.425
}
