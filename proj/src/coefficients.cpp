#include "decompound/coefficients.hpp"

#include "decompound/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace decompound {

CoefficientVector::CoefficientVector(std::vector<CoefficientEntry> entries) : entries_(std::move(entries))
{
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const auto& a, const auto& b) { return spectrum_less(a.index, b.index); });
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!lookup_.emplace(entries_[i].index.label, i).second) {
            throw DomainError("CoefficientVector: duplicate index " + entries_[i].index.label_string());
        }
    }
}

const CoefficientEntry* CoefficientVector::find(const std::vector<int>& label) const
{
    const auto it = lookup_.find(label);
    return it == lookup_.end() ? nullptr : &entries_[it->second];
}

std::complex<double> CoefficientVector::at(const std::vector<int>& label) const
{
    const auto* e = find(label);
    if (!e) {
        SpectralIndex tmp;
        tmp.label = label;
        throw DomainError("CoefficientVector: no entry for index " + tmp.label_string());
    }
    return e->value;
}

double CoefficientVector::max_casimir() const noexcept
{
    return entries_.empty() ? 0.0 : entries_.back().index.casimir;
}

double CoefficientVector::max_abs_imag() const noexcept
{
    double m = 0.0;
    for (const auto& e : entries_) m = std::max(m, std::abs(e.value.imag()));
    return m;
}

CoefficientVector CoefficientVector::conjugated() const
{
    auto copy = entries_;
    for (auto& e : copy) e.value = std::conj(e.value);
    return CoefficientVector(std::move(copy));
}

void write_coefficients_csv(std::ostream& out, const CoefficientVector& coeffs)
{
    out << "label,casimir,multiplicity,re,im,truncated_flag\n";
    out << std::setprecision(17);
    for (const auto& e : coeffs.entries()) {
        out << e.index.label_string() << ',' << e.index.casimir << ',' << e.index.multiplicity << ','
            << e.value.real() << ',' << e.value.imag() << ',' << (e.truncated ? 1 : 0) << '\n';
    }
}

CoefficientVector read_coefficients_csv(std::istream& in, const Space& space)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("label,", 0) != 0) {
        throw ConfigError("coefficient CSV: missing header");
    }
    std::vector<CoefficientEntry> entries;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 6) {
            throw ConfigError("coefficient CSV line " + std::to_string(line_no) + ": expected 6 fields");
        }
        CoefficientEntry e;
        e.index = parse_index(space, fields[0]);
        try {
            e.value = {std::stod(fields[3]), std::stod(fields[4])};
        } catch (const std::exception&) {
            throw ConfigError("coefficient CSV line " + std::to_string(line_no) + ": bad number");
        }
        e.truncated = fields[5] == "1";
        entries.push_back(std::move(e));
    }
    return CoefficientVector(std::move(entries));
}

}  // namespace decompound
