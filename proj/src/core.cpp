#include "srasym/core.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace srasym {

Pmf::Pmf(std::vector<double> probs) : p_(std::move(probs)) {
    if (p_.empty())
        throw std::invalid_argument("pmf is empty");
    double sum = 0;
    for (std::size_t i = 0; i < p_.size(); ++i) {
        if (!(p_[i] >= 0)) {
            std::ostringstream os;
            os << "negative probability at index " << i << " (" << p_[i] << ")";
            throw std::invalid_argument(os.str());
        }
        sum += p_[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "pmf not normalized (sum=" << sum << ")";
        throw std::invalid_argument(os.str());
    }
}

Pmf Pmf::uniform(std::size_t n) {
    return Pmf(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

bool Pmf::full_support() const {
    for (double v : p_)
        if (v <= 0) return false;
    return true;
}

double entropy(const Pmf& p) {
    double h = 0;
    for (double v : p.probs())
        if (v > 0) h -= v * std::log(v);
    return h;
}

DistortionMatrix::DistortionMatrix(const std::vector<std::vector<double>>& values) {
    if (values.empty() || values.front().empty())
        throw std::invalid_argument("distortion matrix is empty");
    rows_ = values.size();
    cols_ = values.front().size();
    v_.reserve(rows_ * cols_);
    for (std::size_t x = 0; x < rows_; ++x) {
        if (values[x].size() != cols_)
            throw std::invalid_argument("distortion matrix rows have unequal lengths");
        bool has_zero = false;
        for (double d : values[x]) {
            if (!(d >= 0))
                throw std::invalid_argument("negative distortion entry");
            if (d == 0) has_zero = true;
            v_.push_back(d);
        }
        if (!has_zero) {
            std::ostringstream os;
            os << "row " << x << " lacks zero-distortion reproduction";
            throw std::invalid_argument(os.str());
        }
    }
}

double DistortionMatrix::max_value() const {
    double m = 0;
    for (double d : v_) m = std::max(m, d);
    return m;
}

double DistortionMatrix::min_expected(const Pmf& px) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < cols_; ++y) {
        double e = 0;
        for (std::size_t x = 0; x < rows_; ++x) e += px[x] * (*this)(x, y);
        best = std::min(best, e);
    }
    return best;
}

std::size_t DistortionMatrix::best_column(const Pmf& px) const {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t y = 0; y < cols_; ++y) {
        double e = 0;
        for (std::size_t x = 0; x < rows_; ++x) e += px[x] * (*this)(x, y);
        if (e < best - 1e-15) {
            best = e;
            arg = y;
        }
    }
    return arg;
}

SourceInstance validate_instance(SourceInstance inst) {
    // Pmf and DistortionMatrix invariants were checked at construction; this
    // re-checks the cross-field ones so validation is idempotent.
    if (inst.px.size() < 2)
        throw std::invalid_argument("source law needs at least 2 symbols");
    if (inst.d1.rows() != inst.px.size())
        throw std::invalid_argument("d1 row count does not match source alphabet");
    if (inst.d2.rows() != inst.px.size())
        throw std::invalid_argument("d2 row count does not match source alphabet");
    if (!(inst.D1 > 0))
        throw std::invalid_argument("D1 must be positive");
    if (!(inst.D2 > 0))
        throw std::invalid_argument("D2 must be positive");
    return inst;
}

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& origin, const std::string& field) {
    if (!j.is_number()) {
        throw std::invalid_argument(origin + ": field \"" + field + "\" must be a number");
    }
    return j.get<double>();
}

std::vector<double> require_vector(const json& j, const std::string& origin,
                                   const std::string& field) {
    if (!j.is_array() || j.empty())
        throw std::invalid_argument(origin + ": field \"" + field +
                                    "\" must be a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : j) out.push_back(require_number(e, origin, field));
    return out;
}

std::vector<std::vector<double>> require_matrix(const json& j, const std::string& origin,
                                                const std::string& field) {
    if (!j.is_array() || j.empty())
        throw std::invalid_argument(origin + ": field \"" + field +
                                    "\" must be a non-empty array of arrays");
    std::vector<std::vector<double>> out;
    for (const auto& row : j) out.push_back(require_vector(row, origin, field));
    return out;
}

}  // namespace

SourceInstance parse_instance_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(origin + ": invalid JSON (" + e.what() + ")");
    }
    for (const char* field : {"px", "d1", "d2", "D1", "D2"}) {
        if (!j.contains(field))
            throw std::invalid_argument(origin + ": missing field \"" + field + "\"");
    }
    try {
        SourceInstance inst{Pmf(require_vector(j["px"], origin, "px")),
                            DistortionMatrix(require_matrix(j["d1"], origin, "d1")),
                            DistortionMatrix(require_matrix(j["d2"], origin, "d2")),
                            require_number(j["D1"], origin, "D1"),
                            require_number(j["D2"], origin, "D2")};
        return validate_instance(std::move(inst));
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        if (msg.rfind(origin, 0) == 0) throw;
        throw std::invalid_argument(origin + ": " + msg);
    }
}

SourceInstance load_instance_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::invalid_argument(path + ": cannot open file");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_instance_json(os.str(), path);
}

}  // namespace srasym
