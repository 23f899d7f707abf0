#pragma once

#include <string>
#include <vector>

#include "rainshift/core/image.hpp"
#include "rainshift/wpl/wpl.hpp"

namespace rainshift::evalm {

// Rows are ground truth, columns are prediction; ignore-index pixels are
// never counted. Matrices merge by addition.
struct ConfusionMatrix {
    int q = 0;
    std::vector<long> counts;  // q x q row-major

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int q_) : q(q_), counts(static_cast<size_t>(q_) * q_, 0) {}

    long& at(int gt, int pred) { return counts[static_cast<size_t>(gt) * q + pred]; }
    long at(int gt, int pred) const { return counts[static_cast<size_t>(gt) * q + pred]; }
    long total() const;
    void merge(const ConfusionMatrix& other);
};

void accumulate_confusion(const LabelImage& pred, const LabelImage& gt, ConfusionMatrix& cm);

struct EvalReport {
    std::vector<double> per_class_iou;  // NaN marks classes with zero union
    double miou_defined = 0.0;          // mean over classes with nonzero union
    double miou_all = 0.0;              // undefined classes counted as zero
    double pixel_accuracy = 0.0;
};

EvalReport evaluate_miou(const ConfusionMatrix& cm);

LabelImage argmax_labels(const wpl::ProbabilityMap& p);

double pseudo_label_coverage(const wpl::PseudoLabelState& state);

// mIoU first, then per-class IoU columns (undefined printed as 0.00).
void write_eval_report_csv(const EvalReport& rep, const std::vector<std::string>& class_names,
                           const std::string& path);

}  // namespace rainshift::evalm
