// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "datlas/simd/kernels.hpp"

using namespace datlas::simd;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Lengths straddling every vector width and remainder path.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 127, 1000};

}  // namespace

TEST_CASE("every available kernel table agrees with the scalar reference") {
  const auto& ref = scalar_kernels();
  for (Isa isa : available_isas()) {
    const auto& k = kernels_for(isa);
    CAPTURE(isa_name(isa));
    for (std::size_t n : kLengths) {
      CAPTURE(n);
      const auto x = random_vec(n, 11 + n), y = random_vec(n, 97 + n);
      const double scale = static_cast<double>(n) + 1.0;
      CHECK(k.dot(x.data(), y.data(), n) == doctest::Approx(ref.dot(x.data(), y.data(), n)).epsilon(1e-13 * scale));
      CHECK(k.sqdist(x.data(), y.data(), n) ==
            doctest::Approx(ref.sqdist(x.data(), y.data(), n)).epsilon(1e-13 * scale));

      auto y1 = y, y2 = y;
      k.axpy(0.37, x.data(), y1.data(), n);
      ref.axpy(0.37, x.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("matrix-vector kernels agree with the scalar reference") {
  const auto& ref = scalar_kernels();
  for (Isa isa : available_isas()) {
    const auto& k = kernels_for(isa);
    CAPTURE(isa_name(isa));
    for (std::size_t rows : {1, 3, 8, 13, 64, 129}) {
      for (std::size_t cols : {1, 2, 5, 9, 32}) {
        CAPTURE(rows);
        CAPTURE(cols);
        const std::size_t ld = rows + 3;
        const auto a = random_vec(ld * cols, rows * 31 + cols);
        const auto xr = random_vec(rows, 5), xc = random_vec(cols, 6);
        std::vector<double> yt1(cols), yt2(cols);
        k.gemv_t(a.data(), ld, rows, cols, xr.data(), yt1.data());
        ref.gemv_t(a.data(), ld, rows, cols, xr.data(), yt2.data());
        for (std::size_t c = 0; c < cols; ++c) CHECK(yt1[c] == doctest::Approx(yt2[c]).epsilon(1e-12));

        auto yn1 = random_vec(rows, 8), yn2 = yn1;
        k.gemv_n(a.data(), ld, rows, cols, xc.data(), yn1.data());
        ref.gemv_n(a.data(), ld, rows, cols, xc.data(), yn2.data());
        for (std::size_t r = 0; r < rows; ++r) CHECK(yn1[r] == doctest::Approx(yn2[r]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("scalar reference kernels are exact on small integers") {
  const auto& k = scalar_kernels();
  const std::vector<double> x{1, 2, 3}, y{4, -5, 6};
  CHECK(k.dot(x.data(), y.data(), 3) == 12.0);
  CHECK(k.sqdist(x.data(), y.data(), 3) == 9.0 + 49.0 + 9.0);
  // 2 x 2 matrix [[1, 3], [2, 4]] column-major.
  const std::vector<double> a{1, 2, 3, 4};
  std::vector<double> yt(2), yn{10, 20};
  k.gemv_t(a.data(), 2, 2, 2, std::vector<double>{1, 1}.data(), yt.data());
  CHECK(yt == std::vector<double>{3, 7});
  k.gemv_n(a.data(), 2, 2, 2, std::vector<double>{1, 1}.data(), yn.data());
  CHECK(yn == std::vector<double>{14, 26});
}

TEST_CASE("scalar is always available and listed first") {
  const auto isas = available_isas();
  REQUIRE_FALSE(isas.empty());
  CHECK(isas.front() == Isa::Scalar);
  CHECK_NOTHROW(kernels());
}
