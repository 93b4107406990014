#pragma once

#include <cstddef>
#include <vector>

namespace epivalue {

/// Five-year age bands 0-4, 5-9, ..., 70-74, 75+.
inline constexpr std::size_t age_band_count = 16;

/// First band of the 65+ population (65-69).
inline constexpr std::size_t band_65_plus = 13;

/// First band of the 70+ population (70-74).
inline constexpr std::size_t band_70_plus = 14;

/// Working-age seeding bands, 20-24 through 45-49 inclusive.
inline constexpr std::size_t default_seed_band_first = 4;
inline constexpr std::size_t default_seed_band_last = 9;

/// Lower edge in years of a 16-band index.
constexpr int band_lower_age(std::size_t band) noexcept { return static_cast<int>(band) * 5; }

using BandVector = std::vector<double>;

/// Dense row-major n x n matrix. Small (n <= 16) in practice.
class SquareMatrix {
  public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_{n}, data_(n * n, fill) {}

    std::size_t size() const noexcept { return n_; }

    double &operator()(std::size_t row, std::size_t col) noexcept { return data_[row * n_ + col]; }
    double operator()(std::size_t row, std::size_t col) const noexcept {
        return data_[row * n_ + col];
    }

    double *data() noexcept { return data_.data(); }
    const double *data() const noexcept { return data_.data(); }

    bool operator==(const SquareMatrix &) const = default;

  private:
    std::size_t n_{0};
    std::vector<double> data_;
};

} // namespace epivalue
