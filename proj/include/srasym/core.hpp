#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace srasym {

/// Probability vector on a finite alphabet. Entries may be zero (test-channel
/// rows); normalization is enforced to 1e-12 at construction.
class Pmf {
public:
    explicit Pmf(std::vector<double> probs);
    static Pmf uniform(std::size_t n);

    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    const std::vector<double>& probs() const { return p_; }
    bool full_support() const;

private:
    std::vector<double> p_;
};

/// Entropy in nats, with 0 log 0 = 0.
double entropy(const Pmf& p);

/// Per-letter distortion values d(x, y) >= 0. Every source row must contain a
/// zero entry (each symbol has a distortion-free reproduction).
class DistortionMatrix {
public:
    explicit DistortionMatrix(const std::vector<std::vector<double>>& values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t x, std::size_t y) const { return v_[x * cols_ + y]; }
    double max_value() const;

    /// Smallest expected distortion achievable with a single reproduction
    /// symbol: min_y E_px[d(X, y)].
    double min_expected(const Pmf& px) const;
    /// Index of the column attaining min_expected (smallest index on ties).
    std::size_t best_column(const Pmf& px) const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> v_;
};

struct SourceInstance {
    Pmf px;
    DistortionMatrix d1;
    DistortionMatrix d2;
    double D1 = 0;
    double D2 = 0;
};

struct RatePoint {
    double R1 = 0;  // nats/symbol
    double R2 = 0;  // sum rate, nats/symbol
};

/// Returns the instance unchanged iff all invariants hold, else throws
/// std::invalid_argument naming the first violated invariant.
SourceInstance validate_instance(SourceInstance inst);

/// Parses {"px": [...], "d1": [[...]], "d2": [[...]], "D1": r, "D2": r}.
/// Errors carry the path and offending field, never a raw parser trace.
SourceInstance load_instance_json(const std::string& path);
SourceInstance parse_instance_json(const std::string& text, const std::string& origin);

}  // namespace srasym
