#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hwrloop/types.hpp"

namespace hwrloop {

struct Prediction {
    Word text;
    std::vector<double> char_confidences; // same length as text, each in [0,1]
};

// Recognizer contract the harness runs against. predict is safe to call
// concurrently on an unchanging model; train_step requires exclusive access.
class Recognizer {
public:
    virtual ~Recognizer() = default;

    virtual Prediction predict(const WordSample& sample) const = 0;
    virtual void train_step(std::span<const WordSample* const> batch, double lr) = 0;
    virtual std::uint64_t version() const = 0;
    virtual std::string checkpoint_json() const = 0;
};

// Built-in trainable recognizer: one centroid per symbol, nearest-centroid
// decoding, softmax confidence over negative squared distances.
class CentroidModel final : public Recognizer {
public:
    CentroidModel(std::uint32_t alphabet_size, std::uint32_t feature_dim);

    // Initializes every centroid to the mean of its class observations over
    // `samples` (the converged fixed point of train_step on that corpus).
    // Classes absent from the corpus fall back to the global mean. Also sets
    // the default confidence temperature from the resulting centroid
    // geometry unless `temperature_override` > 0.
    void init_from_class_means(std::span<const WordSample* const> samples,
                               double temperature_override = 0.0);

    Prediction predict(const WordSample& sample) const override;
    void train_step(std::span<const WordSample* const> batch, double lr) override;
    std::uint64_t version() const override { return version_; }
    std::string checkpoint_json() const override;

    static CentroidModel from_checkpoint_json(const std::string& text);
    static CentroidModel load_checkpoint(const std::string& path);
    void save_checkpoint(const std::string& path) const;

    bool initialized() const { return version_ > 0; }
    std::uint32_t alphabet_size() const { return alphabet_size_; }
    std::uint32_t feature_dim() const { return feature_dim_; }
    double temperature() const { return temperature_; }
    void set_temperature(double t);
    std::span<const double> centroid(Symbol s) const {
        return std::span<const double>(centroids_.data() + static_cast<std::size_t>(s) * feature_dim_,
                                       feature_dim_);
    }
    std::uint64_t class_count(Symbol s) const { return class_counts_[s]; }
    std::string digest() const;

private:
    std::uint32_t alphabet_size_;
    std::uint32_t feature_dim_;
    double temperature_ = 1.0;
    std::uint64_t version_ = 0;
    std::vector<double> centroids_;          // alphabet_size x feature_dim
    std::vector<std::uint64_t> class_counts_; // alphabet_size
};

// Mean per-character confidence of `model` over `samples`; errors on empty input.
double avg_confidence(const Recognizer& model, std::span<const WordSample* const> samples);

} // namespace hwrloop
