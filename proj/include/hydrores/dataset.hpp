#pragma once

#include <hydrores/encoding.hpp>
#include <hydrores/errors.hpp>

#include <string>
#include <vector>

namespace hydrores {

/// Feature vectors with their targets. Construction rejects malformed rows and
/// duplicate observations, since two equal rows force det R = 0.
class Dataset {
public:
    Dataset(std::vector<std::vector<double>> observations, std::vector<double> targets, FeatureSpec spec)
        : observations_(std::move(observations)), targets_(std::move(targets)), spec_(std::move(spec)) {
        spec_.validate();
        if (observations_.size() != targets_.size())
            throw ArgumentError("observation and target counts differ");
        if (observations_.empty()) throw ArgumentError("dataset is empty");
        for (const auto& x : observations_) check_row(x);
        for (std::size_t i = 0; i < observations_.size(); ++i)
            for (std::size_t j = i + 1; j < observations_.size(); ++j)
                if (observations_[i] == observations_[j])
                    throw ArgumentError("duplicate observations at rows " + std::to_string(i) + " and " +
                                        std::to_string(j));
    }

    std::size_t size() const { return observations_.size(); }
    const std::vector<std::vector<double>>& observations() const { return observations_; }
    const std::vector<double>& targets() const { return targets_; }
    const FeatureSpec& spec() const { return spec_; }

    /// Throws unless x has one in-domain entry per feature.
    void check_row(const std::vector<double>& x) const {
        if (x.size() != spec_.features.size()) throw ArgumentError("observation width does not match feature spec");
        for (std::size_t f = 0; f < x.size(); ++f) {
            if (const auto* d = std::get_if<Discrete>(&spec_.features[f])) {
                if (x[f] != std::floor(x[f]) || x[f] < 0 || x[f] >= d->cardinality)
                    throw ArgumentError("discrete value out of range");
            } else {
                const auto& c = std::get<Continuous>(spec_.features[f]);
                if (!(x[f] >= c.lo && x[f] <= c.hi)) throw ArgumentError("continuous value outside its domain");
            }
        }
    }

private:
    std::vector<std::vector<double>> observations_;
    std::vector<double> targets_;
    FeatureSpec spec_;
};

} // namespace hydrores
