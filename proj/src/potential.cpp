#include "pieces/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pieces {

Potential Potential::step(double magnitude, double range) {
    if (magnitude < 0.0 || range < 0.0) {
        throw std::invalid_argument("Potential::step: magnitude and range must be non-negative");
    }
    Potential u;
    u.kind_ = Kind::step;
    u.range_ = range;
    u.max_value_ = magnitude;
    return u;
}

Potential Potential::table(std::vector<double> xs, std::vector<double> values) {
    if (xs.size() != values.size() || xs.size() < 2) {
        throw std::invalid_argument("Potential::table: need matching xs/values, at least two");
    }
    if (xs.front() != 0.0) throw std::invalid_argument("Potential::table: xs must start at 0");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (!(xs[i] < xs[i + 1])) throw std::invalid_argument("Potential::table: xs must increase");
    }
    for (double v : values) {
        if (v < 0.0 || !std::isfinite(v)) {
            throw std::invalid_argument("Potential::table: values must be finite and non-negative");
        }
    }
    Potential u;
    u.kind_ = Kind::table;
    u.range_ = xs.back();
    u.max_value_ = *std::max_element(values.begin(), values.end());
    u.xs_ = std::move(xs);
    u.vals_ = std::move(values);
    return u;
}

double Potential::operator()(double x) const {
    x = std::fabs(x);
    if (x > range_ || max_value_ == 0.0) return 0.0;
    if (kind_ == Kind::step) return max_value_;
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    if (it == xs_.begin()) return vals_.front();
    if (it == xs_.end()) return vals_.back();
    std::size_t j = static_cast<std::size_t>(it - xs_.begin());
    const double t = (x - xs_[j - 1]) / (xs_[j] - xs_[j - 1]);
    return vals_[j - 1] + t * (vals_[j] - vals_[j - 1]);
}

std::string Potential::describe() const {
    std::ostringstream os;
    if (kind_ == Kind::step) {
        os << "step:" << max_value_ << ":" << range_;
    } else {
        os << "table[" << xs_.size() << " pts, range " << range_ << "]";
    }
    return os.str();
}

Potential parse_potential(const std::string& spec) {
    if (spec.rfind("step:", 0) == 0) {
        const std::string rest = spec.substr(5);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) {
            throw std::invalid_argument("potential spec: expected step:<u0>:<M>");
        }
        const double u0 = std::stod(rest.substr(0, colon));
        const double M = std::stod(rest.substr(colon + 1));
        return Potential::step(u0, M);
    }
    if (spec.rfind("table:", 0) == 0) {
        const std::string path = spec.substr(6);
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("potential spec: cannot open " + path);
        std::vector<double> xs, vs;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ls(line);
            double x, v;
            if (ls >> x >> v) {
                xs.push_back(x);
                vs.push_back(v);
            }
        }
        return Potential::table(std::move(xs), std::move(vs));
    }
    throw std::invalid_argument("potential spec: expected step:<u0>:<M> or table:<path>");
}

}  // namespace pieces
