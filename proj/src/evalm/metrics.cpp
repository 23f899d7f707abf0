#include "rainshift/evalm/metrics.hpp"

#include <cmath>
#include <limits>

#include "rainshift/core/check.hpp"
#include "rainshift/core/csv.hpp"

namespace rainshift::evalm {

long ConfusionMatrix::total() const {
    long t = 0;
    for (long v : counts) t += v;
    return t;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    check(q == other.q, "ConfusionMatrix::merge: class count mismatch");
    for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

void accumulate_confusion(const LabelImage& pred, const LabelImage& gt, ConfusionMatrix& cm) {
    check(pred.h == gt.h && pred.w == gt.w, "accumulate_confusion: shape mismatch");
    for (size_t i = 0; i < gt.data.size(); ++i) {
        const uint8_t g = gt.data[i];
        if (g == kIgnoreIndex) continue;
        const uint8_t p = pred.data[i];
        check(g < cm.q && p < cm.q, "accumulate_confusion: class out of range");
        ++cm.at(g, p);
    }
}

EvalReport evaluate_miou(const ConfusionMatrix& cm) {
    check(cm.q > 0 && cm.total() > 0, "evaluate_miou: empty confusion matrix");
    EvalReport rep;
    rep.per_class_iou.assign(cm.q, std::numeric_limits<double>::quiet_NaN());
    double sum_defined = 0.0, sum_all = 0.0;
    int defined = 0;
    long correct = 0;
    for (int c = 0; c < cm.q; ++c) {
        long row = 0, col = 0;
        for (int k = 0; k < cm.q; ++k) {
            row += cm.at(c, k);
            col += cm.at(k, c);
        }
        correct += cm.at(c, c);
        const long uni = row + col - cm.at(c, c);
        if (uni > 0) {
            const double iou = static_cast<double>(cm.at(c, c)) / static_cast<double>(uni);
            rep.per_class_iou[c] = iou;
            sum_defined += iou;
            sum_all += iou;
            ++defined;
        }
    }
    rep.miou_defined = defined ? sum_defined / defined : 0.0;
    rep.miou_all = sum_all / cm.q;
    rep.pixel_accuracy = static_cast<double>(correct) / static_cast<double>(cm.total());
    return rep;
}

LabelImage argmax_labels(const wpl::ProbabilityMap& p) {
    LabelImage out(p.h, p.w);
    for (size_t u = 0; u < p.pixels(); ++u) {
        int best = 0;
        double best_v = p.p[u * p.q];
        for (int c = 1; c < p.q; ++c) {
            if (p.p[u * p.q + c] > best_v) {
                best_v = p.p[u * p.q + c];
                best = c;
            }
        }
        out.data[u] = static_cast<uint8_t>(best);
    }
    return out;
}

double pseudo_label_coverage(const wpl::PseudoLabelState& state) {
    if (state.included.empty()) return 0.0;
    return static_cast<double>(state.included_count()) /
           static_cast<double>(state.included.size());
}

void write_eval_report_csv(const EvalReport& rep, const std::vector<std::string>& class_names,
                           const std::string& path) {
    std::vector<std::string> header{"mIoU"};
    for (const auto& n : class_names) header.push_back(n);
    CsvWriter csv(path, header);
    std::vector<std::string> row{CsvWriter::fmt(rep.miou_all)};
    for (double iou : rep.per_class_iou)
        row.push_back(CsvWriter::fmt(std::isnan(iou) ? 0.0 : iou));
    csv.write_row(row);
}

}  // namespace rainshift::evalm
