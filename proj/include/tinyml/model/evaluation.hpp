/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tinyml/core/error.hpp"
#include "tinyml/core/matrix.hpp"
#include "tinyml/dsp/features.hpp"
#include "tinyml/model/network.hpp"

namespace tinyml::model {

inline constexpr double kDefaultMinConfidence = 0.6;

/// Thresholded classification report. A row whose top probability is below
/// min_confidence is "uncertain": it counts as an error for accuracy, is
/// excluded from the confusion matrix and is tallied in rejected[true class].
struct EvalReport {
    std::vector<std::string> labels;
    double min_confidence = kDefaultMinConfidence;
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t rejected_count = 0;
    double accuracy = 0.0;
    Matrix<std::size_t> confusion;  // [true][predicted]
    std::vector<std::size_t> rejected;
    std::vector<double> precision;
    std::vector<double> recall;
};

/// Scores any model given a callable mapping a feature row to a probability
/// vector.
template <typename Predict>
EvalReport evaluate_with(Predict&& predict, const dsp::FeatureSet& test, double min_confidence) {
    require(test.ok() && test.size() > 0, "test set is empty");
    const std::size_t k = test.labels.size();
    EvalReport r{test.labels, min_confidence, test.size(), 0, 0, 0.0, Matrix<std::size_t>(k, k, 0),
                 std::vector<std::size_t>(k, 0), {}, {}};
    for (std::size_t i = 0; i < test.size(); ++i) {
        const std::vector<double> probs = predict(test.features.row(i));
        const std::size_t truth = test.targets[i];
        const std::size_t best = argmax(probs);
        if (probs[best] < min_confidence) {
            ++r.rejected_count;
            ++r.rejected[truth];
            continue;
        }
        ++r.confusion(truth, best);
        if (best == truth) ++r.correct;
    }
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t predicted = 0, actual = r.rejected[c];
        for (std::size_t j = 0; j < k; ++j) {
            predicted += r.confusion(j, c);
            actual += r.confusion(c, j);
        }
        r.precision.push_back(predicted ? static_cast<double>(r.confusion(c, c)) / static_cast<double>(predicted) : 0.0);
        r.recall.push_back(actual ? static_cast<double>(r.confusion(c, c)) / static_cast<double>(actual) : 0.0);
    }
    return r;
}

inline EvalReport evaluate(const ModelParams& p, const dsp::FeatureSet& test, double min_confidence) {
    return evaluate_with([&](std::span<const double> x) { return forward(p, x); }, test, min_confidence);
}

inline std::string format_report(const EvalReport& r) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << "accuracy        " << r.accuracy << " (" << r.correct << "/" << r.total << ")\n";
    os << "min_confidence  " << r.min_confidence << "\n";
    os << "uncertain       " << r.rejected_count << "\n\n";
    std::size_t w = 10;
    for (const auto& l : r.labels) w = std::max(w, l.size() + 2);
    os << std::left << std::setw(static_cast<int>(w)) << "true\\pred";
    for (const auto& l : r.labels) os << std::right << std::setw(static_cast<int>(w)) << l;
    os << std::right << std::setw(static_cast<int>(w)) << "uncertain" << "\n";
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
        os << std::left << std::setw(static_cast<int>(w)) << r.labels[i];
        for (std::size_t j = 0; j < r.labels.size(); ++j)
            os << std::right << std::setw(static_cast<int>(w)) << r.confusion(i, j);
        os << std::right << std::setw(static_cast<int>(w)) << r.rejected[i] << "\n";
    }
    os << "\n" << std::left << std::setw(static_cast<int>(w)) << "class" << std::right << std::setw(12) << "precision"
       << std::setw(12) << "recall" << "\n";
    for (std::size_t i = 0; i < r.labels.size(); ++i)
        os << std::left << std::setw(static_cast<int>(w)) << r.labels[i] << std::right << std::setw(12)
           << r.precision[i] << std::setw(12) << r.recall[i] << "\n";
    return os.str();
}

inline nlohmann::ordered_json report_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["accuracy"] = r.accuracy;
    j["correct"] = r.correct;
    j["total"] = r.total;
    j["min_confidence"] = r.min_confidence;
    j["rejected_count"] = r.rejected_count;
    j["labels"] = r.labels;
    auto conf = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < r.labels.size(); ++c) row.push_back(r.confusion(i, c));
        conf.push_back(row);
    }
    j["confusion"] = conf;
    j["rejected_per_class"] = r.rejected;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    return j;
}

}  // namespace tinyml::model
