#pragma once

#include "decompound/spaces.hpp"

#include <complex>
#include <iosfwd>
#include <map>
#include <vector>

namespace decompound {

struct CoefficientEntry {
    SpectralIndex index;
    std::complex<double> value;
    /// Set by estimators when the value was truncated to 0.
    bool truncated = false;
};

/// Spectral representation of a density or estimate: SpectralIndex -> complex, in spectrum order.
class CoefficientVector {
public:
    CoefficientVector() = default;
    explicit CoefficientVector(std::vector<CoefficientEntry> entries);

    [[nodiscard]] const std::vector<CoefficientEntry>& entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }

    /// nullptr if the label is absent.
    [[nodiscard]] const CoefficientEntry* find(const std::vector<int>& label) const;
    /// Throws DomainError if the label is absent.
    [[nodiscard]] std::complex<double> at(const std::vector<int>& label) const;

    [[nodiscard]] double max_casimir() const noexcept;
    [[nodiscard]] double max_abs_imag() const noexcept;

    /// Entry-wise complex conjugate.
    [[nodiscard]] CoefficientVector conjugated() const;

private:
    std::vector<CoefficientEntry> entries_;
    std::map<std::vector<int>, std::size_t> lookup_;
};

/// CSV with columns label,casimir,multiplicity,re,im,truncated_flag (17 significant digits).
void write_coefficients_csv(std::ostream& out, const CoefficientVector& coeffs);
CoefficientVector read_coefficients_csv(std::istream& in, const Space& space);

}  // namespace decompound
