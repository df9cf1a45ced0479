#include "hwrloop/recognizer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "hwrloop/digest.hpp"
#include "hwrloop/errors.hpp"

namespace hwrloop {

CentroidModel::CentroidModel(std::uint32_t alphabet_size, std::uint32_t feature_dim)
    : alphabet_size_(alphabet_size),
      feature_dim_(feature_dim),
      centroids_(static_cast<std::size_t>(alphabet_size) * feature_dim, 0.0),
      class_counts_(alphabet_size, 0) {
    if (alphabet_size < 2) throw config_error("alphabet_size must be at least 2");
    if (feature_dim == 0) throw config_error("feature_dim must be positive");
}

void CentroidModel::set_temperature(double t) {
    if (!(t > 0.0)) throw config_error("confidence temperature must be positive");
    temperature_ = t;
}

void CentroidModel::init_from_class_means(std::span<const WordSample* const> samples,
                                          double temperature_override) {
    std::fill(centroids_.begin(), centroids_.end(), 0.0);
    std::fill(class_counts_.begin(), class_counts_.end(), 0);
    std::vector<double> global_mean(feature_dim_, 0.0);
    std::uint64_t total = 0;

    for (const WordSample* s : samples) {
        for (std::size_t i = 0; i < s->truth.size(); ++i) {
            const Symbol c = s->truth[i];
            if (c >= alphabet_size_) throw protocol_error("symbol id outside alphabet");
            const auto obs = s->observation(i, feature_dim_);
            double* centroid = centroids_.data() + static_cast<std::size_t>(c) * feature_dim_;
            for (std::uint32_t d = 0; d < feature_dim_; ++d) {
                centroid[d] += obs[d];
                global_mean[d] += obs[d];
            }
            ++class_counts_[c];
            ++total;
        }
    }
    if (total == 0) throw protocol_error("cannot initialize model from an empty corpus");

    for (std::uint32_t d = 0; d < feature_dim_; ++d) global_mean[d] /= static_cast<double>(total);
    for (std::uint32_t c = 0; c < alphabet_size_; ++c) {
        double* centroid = centroids_.data() + static_cast<std::size_t>(c) * feature_dim_;
        if (class_counts_[c] > 0) {
            for (std::uint32_t d = 0; d < feature_dim_; ++d)
                centroid[d] /= static_cast<double>(class_counts_[c]);
        } else {
            for (std::uint32_t d = 0; d < feature_dim_; ++d) centroid[d] = global_mean[d];
        }
    }

    if (temperature_override > 0.0) {
        temperature_ = temperature_override;
    } else {
        // Saturating default: one eighth of the smallest squared inter-centroid
        // gap keeps the winning softmax weight near 1 whenever class gaps
        // dominate the within-class spread, which is the regime where reported
        // confidence stays high regardless of the actual error rate.
        double min_sq = std::numeric_limits<double>::infinity();
        for (std::uint32_t a = 0; a < alphabet_size_; ++a) {
            for (std::uint32_t b = a + 1; b < alphabet_size_; ++b) {
                const double* ca = centroids_.data() + static_cast<std::size_t>(a) * feature_dim_;
                const double* cb = centroids_.data() + static_cast<std::size_t>(b) * feature_dim_;
                double sq = 0.0;
                for (std::uint32_t d = 0; d < feature_dim_; ++d) {
                    const double diff = ca[d] - cb[d];
                    sq += diff * diff;
                }
                min_sq = std::min(min_sq, sq);
            }
        }
        temperature_ = min_sq > 0.0 ? min_sq / 8.0 : 1.0;
    }
    version_ = 1;
}

Prediction CentroidModel::predict(const WordSample& sample) const {
    if (!initialized()) throw protocol_error("predict on uninitialized model");

    Prediction out;
    out.text.reserve(sample.truth.size());
    out.char_confidences.reserve(sample.truth.size());
    std::vector<double> sq(alphabet_size_);

    for (std::size_t i = 0; i < sample.truth.size(); ++i) {
        const auto obs = sample.observation(i, feature_dim_);
        Symbol best = 0;
        double best_sq = std::numeric_limits<double>::infinity();
        for (std::uint32_t c = 0; c < alphabet_size_; ++c) {
            const double* centroid = centroids_.data() + static_cast<std::size_t>(c) * feature_dim_;
            double acc = 0.0;
            for (std::uint32_t d = 0; d < feature_dim_; ++d) {
                const double diff = static_cast<double>(obs[d]) - centroid[d];
                acc += diff * diff;
            }
            sq[c] = acc;
            if (acc < best_sq) { // strict <: ties resolve to the lower symbol id
                best_sq = acc;
                best = static_cast<Symbol>(c);
            }
        }
        double denom = 0.0;
        for (std::uint32_t c = 0; c < alphabet_size_; ++c)
            denom += std::exp(-(sq[c] - best_sq) / temperature_);
        out.text.push_back(best);
        out.char_confidences.push_back(1.0 / denom);
    }
    return out;
}

void CentroidModel::train_step(std::span<const WordSample* const> batch, double lr) {
    if (!(lr > 0.0)) throw protocol_error("invalid learning rate");
    if (batch.empty()) throw protocol_error("train_step on empty batch");
    for (const WordSample* s : batch) {
        if (s->readability == Readability::NonReadable)
            throw protocol_error("non-readable sample " + std::to_string(s->sample_id) +
                                 " in training batch");
    }
    for (const WordSample* s : batch) {
        for (std::size_t i = 0; i < s->truth.size(); ++i) {
            const Symbol c = s->truth[i];
            if (c >= alphabet_size_) throw protocol_error("symbol id outside alphabet");
            const auto obs = s->observation(i, feature_dim_);
            double* centroid = centroids_.data() + static_cast<std::size_t>(c) * feature_dim_;
            for (std::uint32_t d = 0; d < feature_dim_; ++d)
                centroid[d] = (1.0 - lr) * centroid[d] + lr * static_cast<double>(obs[d]);
            ++class_counts_[c];
        }
    }
    ++version_;
}

std::string CentroidModel::checkpoint_json() const {
    std::ostringstream out;
    out << "{\"format_version\":1,\"A\":" << alphabet_size_ << ",\"D\":" << feature_dim_
        << ",\"temperature\":" << format_double(temperature_) << ",\"version\":" << version_
        << ",\"centroids\":[";
    for (std::uint32_t c = 0; c < alphabet_size_; ++c) {
        if (c) out << ',';
        out << '[';
        const double* centroid = centroids_.data() + static_cast<std::size_t>(c) * feature_dim_;
        for (std::uint32_t d = 0; d < feature_dim_; ++d) {
            if (d) out << ',';
            out << format_double(centroid[d]);
        }
        out << ']';
    }
    out << "],\"class_counts\":[";
    for (std::uint32_t c = 0; c < alphabet_size_; ++c) {
        if (c) out << ',';
        out << class_counts_[c];
    }
    out << "]}\n";
    return out.str();
}

CentroidModel CentroidModel::from_checkpoint_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw protocol_error(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != 1)
            throw protocol_error("unsupported checkpoint format_version");
        CentroidModel m(j.at("A").get<std::uint32_t>(), j.at("D").get<std::uint32_t>());
        m.set_temperature(j.at("temperature").get<double>());
        m.version_ = j.at("version").get<std::uint64_t>();
        const auto& cents = j.at("centroids");
        const auto& counts = j.at("class_counts");
        if (cents.size() != m.alphabet_size_ || counts.size() != m.alphabet_size_)
            throw protocol_error("checkpoint dimensions do not match header");
        for (std::uint32_t c = 0; c < m.alphabet_size_; ++c) {
            const auto& row = cents.at(c);
            if (row.size() != m.feature_dim_)
                throw protocol_error("checkpoint centroid row has wrong dimension");
            for (std::uint32_t d = 0; d < m.feature_dim_; ++d)
                m.centroids_[static_cast<std::size_t>(c) * m.feature_dim_ + d] =
                    row.at(d).get<double>();
            m.class_counts_[c] = counts.at(c).get<std::uint64_t>();
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw protocol_error(std::string("malformed checkpoint: ") + e.what());
    }
}

CentroidModel CentroidModel::load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw protocol_error("cannot open checkpoint: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_checkpoint_json(ss.str());
}

void CentroidModel::save_checkpoint(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw protocol_error("cannot write checkpoint: " + path);
    out << checkpoint_json();
}

std::string CentroidModel::digest() const { return digest_hex(checkpoint_json()); }

double avg_confidence(const Recognizer& model, std::span<const WordSample* const> samples) {
    if (samples.empty()) throw protocol_error("avg_confidence on empty sample set");
    double sum = 0.0;
    std::uint64_t n = 0;
    for (const WordSample* s : samples) {
        const Prediction p = model.predict(*s);
        for (double c : p.char_confidences) sum += c;
        n += p.char_confidences.size();
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

} // namespace hwrloop
