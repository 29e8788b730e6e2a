#include "sslkit/field.hpp"

#include "sslkit/io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

using namespace ssl;

namespace {

Scene one_source_scene(const Vec3& pos, double freq) {
  Scene sc;
  sc.sources.push_back({pos, 1.0});
  sc.frequency = freq;
  sc.grid.distance = std::max(pos.z(), 0.7);
  return sc;
}

}  // namespace

TEST_CASE("monopole pressure: full-cycle phase at r = 1 m, f = 343 Hz") {
  MonopoleSource src{Vec3(0, 0, 1), 1.0};
  Complex p = monopole_pressure(src, Vec3(0, 0, 0), 343.0);
  CHECK(p.real() == doctest::Approx(1.0 / (4.0 * std::numbers::pi)).epsilon(1e-12));
  CHECK(p.imag() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("monopole pressure: magnitude is 1/(4 pi r) at any frequency") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> freq(200, 1000), coord(-0.5, 0.5);
  for (int i = 0; i < 50; ++i) {
    MonopoleSource src{Vec3(coord(rng), coord(rng), 1.0 + coord(rng)), 1.0};
    Vec3 mic(coord(rng), coord(rng), 0.0);
    double r = (mic - src.position).norm();
    Complex p = monopole_pressure(src, mic, freq(rng));
    CHECK(std::abs(p) == doctest::Approx(1.0 / (4.0 * std::numbers::pi * r)).epsilon(1e-12));
  }
}

TEST_CASE("monopole pressure: frozen extended-precision value at r = 0.5, f = 500") {
  MonopoleSource src{Vec3(0, 0, 0.5), 1.0};
  Complex p = monopole_pressure(src, Vec3(0, 0, 0), 500.0);
  // independent high-precision evaluation of the closed form
  CHECK(p.real() == doctest::Approx(-0.021074945463311490).epsilon(1e-13));
  CHECK(p.imag() == doctest::Approx(0.15775342336793484).epsilon(1e-13));
}

TEST_CASE("monopole pressure: zero distance is a singularity") {
  MonopoleSource src{Vec3(0.1, 0.2, 0.3), 1.0};
  CHECK_THROWS_AS(monopole_pressure(src, Vec3(0.1, 0.2, 0.3), 500.0), singularity_error);
}

TEST_CASE("monopole pressure: reciprocity in source/microphone positions") {
  MonopoleSource a{Vec3(0.1, -0.2, 0.9), 1.0};
  Vec3 b(0.05, 0.0, 0.0);
  Complex p1 = monopole_pressure(a, b, 777.0);
  Complex p2 = monopole_pressure({b, 1.0}, a.position, 777.0);
  CHECK(p1.real() == doctest::Approx(p2.real()).epsilon(1e-15));
  CHECK(p1.imag() == doctest::Approx(p2.imag()).epsilon(1e-15));
}

TEST_CASE("synthesize: single source equals per-mic monopole pressure") {
  Scene sc = one_source_scene(Vec3(0.12, -0.3, 0.8), 640.0);
  auto frame = synthesize(sc);
  auto mics = mic_positions(sc.array);
  REQUIRE(frame.values.size() == 144);
  for (int m = 0; m < 144; ++m) {
    Complex want = monopole_pressure(sc.sources[0], mics[static_cast<std::size_t>(m)], 640.0);
    CHECK(std::abs(frame.values(m) - want) <= 1e-18);
  }
}

TEST_CASE("synthesize: two equidistant half-cycle sources sum to -1/(2 pi)") {
  // both sources 1 m from the array center; 171.5 Hz puts each at phase pi
  Scene sc;
  sc.frequency = 171.5;
  sc.grid.distance = 1.0;
  sc.array.mics_per_axis = 2;  // keep the frame small; we inspect one mic by hand
  // both sources directly above mic 0 at (-0.15, -0.15, 0), so r = 1 exactly
  sc.sources.push_back({Vec3(-0.15, -0.15, 1.0), 1.0});
  sc.sources.push_back({Vec3(-0.15, -0.15, 1.0), 1.0});
  auto frame = synthesize(sc);
  CHECK(frame.values(0).real() == doctest::Approx(-1.0 / (2.0 * std::numbers::pi)).epsilon(1e-12));
  CHECK(frame.values(0).imag() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("synthesize: superposition of three sources, element-wise") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(-0.4, 0.4);
  Scene all;
  all.frequency = 512.0;
  all.grid.distance = 0.9;
  CVec sum = CVec::Zero(144);
  for (int k = 0; k < 3; ++k) {
    MonopoleSource src{Vec3(coord(rng), coord(rng), 0.9), 1.0};
    all.sources.push_back(src);
    Scene single = all;
    single.sources = {src};
    sum += synthesize(single).values;
  }
  CVec combined = synthesize(all).values;
  CHECK((combined - sum).norm() <= 1e-15 * sum.norm());
}

TEST_CASE("synthesize: scaling source strengths scales the frame linearly") {
  Scene sc = one_source_scene(Vec3(0.05, 0.1, 0.75), 450.0);
  sc.sources.push_back({Vec3(-0.2, 0.3, 0.75), 1.0});
  auto base = synthesize(sc).values;
  Scene scaled = sc;
  for (auto& s : scaled.sources) s.strength *= 3.5;
  auto big = synthesize(scaled).values;
  CHECK((big - 3.5 * base).norm() <= 1e-14 * big.norm());
}

TEST_CASE("to_spl: reference pressure maps to 0 dB") {
  ComplexPressureFrame frame;
  frame.mics_per_axis = 2;
  frame.values = CVec::Constant(4, Complex(20e-6, 0.0));
  auto spl = to_spl(frame);
  CHECK(spl.values(0, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK_FALSE(spl.clamped());
}

TEST_CASE("to_spl: closed-form dB values") {
  ComplexPressureFrame frame;
  frame.mics_per_axis = 2;
  const double q4pi = 1.0 / (4.0 * std::numbers::pi);  // |p| at Q=1, r=1
  const double q2pi = 1.0 / (2.0 * std::numbers::pi);  // |p| at Q=1, r=0.5
  frame.values.resize(4);
  frame.values << Complex(q4pi, 0), Complex(0, q4pi), Complex(q2pi, 0), Complex(0, -q2pi);
  auto spl = to_spl(frame);
  CHECK(spl.values(0, 0) == doctest::Approx(71.9952028062784512).epsilon(1e-14));
  CHECK(spl.values(0, 1) == doctest::Approx(71.9952028062784512).epsilon(1e-14));  // phase invariant
  CHECK(spl.values(1, 0) == doctest::Approx(78.0158027195580751).epsilon(1e-14));
  CHECK(spl.values(1, 1) == doctest::Approx(78.0158027195580751).epsilon(1e-14));
}

TEST_CASE("to_spl: global phase rotation leaves SPL unchanged") {
  Scene sc = one_source_scene(Vec3(0.881 * 0.5 - 0.2, 0.1, 0.95), 333.0);
  auto frame = synthesize(sc);
  auto spl_a = to_spl(frame);
  ComplexPressureFrame rotated = frame;
  rotated.values *= std::polar(1.0, 1.234);
  auto spl_b = to_spl(rotated);
  CHECK((spl_a.values - spl_b.values).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("to_spl: SPL shift under strength scaling is 20 log10(alpha)") {
  Scene sc = one_source_scene(Vec3(0.0, 0.25, 0.8), 600.0);
  auto a = to_spl(synthesize(sc));
  Scene scaled = sc;
  scaled.sources[0].strength = 2.0;
  auto b = to_spl(synthesize(scaled));
  const double shift = 20.0 * std::log10(2.0);
  CHECK(((b.values - a.values).array() - shift).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("to_spl: perfect cancellation hits the floor and is flagged") {
  ComplexPressureFrame frame;
  frame.mics_per_axis = 2;
  frame.values = CVec::Zero(4);
  frame.values(1) = Complex(0.01, 0);
  auto spl = to_spl(frame);
  CHECK(spl.clamped());
  CHECK(spl.clamped_cells == 3);
  CHECK(spl.values(0, 0) == doctest::Approx(20.0 * std::log10(1e-12 / 20e-6)));
}

TEST_CASE("add_noise: sigma follows the SNR closed form") {
  // sigma_signal = 1 and snr 30 dB -> sigma_noise = 10^{-1.5}
  Mat sig(2, 2);
  sig << 1, -1, 1, -1;  // population std exactly 1
  NoiseConfig cfg{30.0, 99, true, false};
  Mat noisy = add_noise(sig, cfg);
  Mat delta = noisy - sig;
  Mat expected = gaussian_noise_field(2, 2, 0.03162277660168379, 99);
  CHECK((delta - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("add_noise: Monte-Carlo SNR estimate over 1e5 draws hits 30 +- 0.1 dB") {
  const int n = 317;  // 317^2 ~ 1e5 draws
  Mat sig = gaussian_noise_field(n, n, 1.0, 7);  // any spread-1-ish signal
  const double sigma_signal = population_stddev(sig);
  NoiseConfig cfg{30.0, 1234, true, false};
  Mat noisy = add_noise(sig, cfg);
  const double sigma_noise = population_stddev(noisy - sig);
  const double snr = 10.0 * std::log10((sigma_signal * sigma_signal) / (sigma_noise * sigma_noise));
  CHECK(snr == doctest::Approx(30.0).epsilon(0.1 / 30.0));
}

TEST_CASE("add_noise: determinism and signal-independence of the field") {
  Mat a = Mat::Random(12, 12);
  Mat b = 2.0 * Mat::Random(12, 12);
  const double sa = population_stddev(a);
  // scale b so its population std matches a's: the injected field must match
  Mat b_scaled = b * (sa / population_stddev(b));
  b_scaled.array() += 0.3;  // mean shift must not matter
  NoiseConfig cfg{30.0, 555, true, false};
  Mat na = add_noise(a, cfg) - a;
  Mat nb = add_noise(b_scaled, cfg) - b_scaled;
  CHECK((na - nb).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("add_noise: disabled or infinite SNR is the identity") {
  Mat sig = Mat::Random(4, 4);
  NoiseConfig off{30.0, 1, false, false};
  CHECK((add_noise(sig, off) - sig).cwiseAbs().maxCoeff() == 0.0);
  NoiseConfig inf_snr{std::numeric_limits<double>::infinity(), 1, true, false};
  CHECK((add_noise(sig, inf_snr) - sig).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("add_noise: zero-spread signal is rejected") {
  Mat sig = Mat::Constant(3, 3, 1.0);
  NoiseConfig cfg{30.0, 1, true, false};
  CHECK_THROWS_AS(add_noise(sig, cfg), numeric_error);
}

TEST_CASE("csv round trip preserves doubles bit-exactly") {
  Mat m = Mat::Random(5, 7);
  m(0, 0) = 1.0 / 3.0;
  m(4, 6) = -1e-17;
  auto path = std::filesystem::temp_directory_path() / "sslkit_test_roundtrip.csv";
  write_csv(path.string(), m);
  Mat back = read_csv(path.string());
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}
