#include "rowtracker/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rowtracker/error.hpp"

namespace rowtracker {

double normalized_error(int gt, int pred) {
  if (gt == 0) throw Error(ErrorCode::ZeroGroundTruth, "normalized error needs gt > 0");
  if (gt < 0 || pred < 0) throw Error(ErrorCode::DegenerateInput, "counts must be non-negative");
  return static_cast<double>(std::abs(gt - pred)) / static_cast<double>(gt);
}

MeanStd aggregate(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "aggregate of an empty list");
  // Extended accumulation: n copies of one value give exactly that mean and
  // a zero deviation.
  const long double n = static_cast<long double>(values.size());
  long double sum = 0.0L;
  for (double v : values) sum += v;
  const long double mean = sum / n;
  long double ss = 0.0L;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(ss / n))};
}

double r_squared(std::span<const int> gts, std::span<const int> preds) {
  if (gts.size() != preds.size()) {
    throw Error(ErrorCode::DegenerateInput, "gt and prediction series differ in length");
  }
  if (gts.size() < 2) throw Error(ErrorCode::DegenerateInput, "r_squared needs at least two rows");
  // Integer sums are exact; the only rounding happens in the final division.
  long long sum = 0;
  for (int g : gts) sum += g;
  const long long n = static_cast<long long>(gts.size());
  long long ss_tot_n2 = 0;  // n^2 * SS_tot
  long long ss_res = 0;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const long long dev = n * gts[i] - sum;
    ss_tot_n2 += dev * dev;
    const long long e = static_cast<long long>(gts[i]) - preds[i];
    ss_res += e * e;
  }
  if (ss_tot_n2 == 0) throw Error(ErrorCode::DegenerateInput, "ground truth is constant");
  return 1.0 - static_cast<double>(ss_res) * static_cast<double>(n * n) /
                   static_cast<double>(ss_tot_n2);
}

const CountAggregate* CountReport::find(Variant v, double iou) const {
  for (const CountAggregate& a : aggregates) {
    if (a.variant == v && a.iou == iou) return &a;
  }
  return nullptr;
}

std::vector<CountAggregate> summarize(std::span<const CountRecord> records) {
  // Cells keep first-seen order so the block mirrors the sweep grid.
  std::vector<std::pair<Variant, double>> order;
  std::map<std::pair<Variant, double>, std::vector<const CountRecord*>> cells;
  for (const CountRecord& r : records) {
    const auto key = std::make_pair(r.variant, r.iou);
    if (!cells.count(key)) order.push_back(key);
    cells[key].push_back(&r);
  }
  std::vector<CountAggregate> out;
  for (const auto& key : order) {
    CountAggregate agg;
    agg.variant = key.first;
    agg.iou = key.second;
    std::vector<double> nes;
    std::vector<int> gts, preds;
    for (const CountRecord* r : cells[key]) {
      ++agg.rows;
      if (!r->pred) {
        ++agg.failed;
        continue;
      }
      if (!r->gt) continue;
      gts.push_back(*r->gt);
      preds.push_back(*r->pred);
      if (*r->gt == 0) {
        ++agg.excluded_zero_gt;
      } else {
        nes.push_back(normalized_error(*r->gt, *r->pred));
      }
    }
    if (!nes.empty()) agg.ne = aggregate(nes);
    try {
      agg.r2 = r_squared(gts, preds);
    } catch (const Error&) {
      agg.r2.reset();
    }
    out.push_back(agg);
  }
  return out;
}

CountReport sweep(std::span<const FrameSource* const> rows, std::span<const Variant> variants,
                  std::span<const double> iou_thresholds, const TrackerConfig& base) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "sweep needs at least one row");
  if (variants.empty()) throw Error(ErrorCode::EmptyInput, "sweep needs at least one variant");
  if (iou_thresholds.empty()) {
    throw Error(ErrorCode::EmptyInput, "sweep needs at least one IoU threshold");
  }

  CountReport report;
  for (const FrameSource* row : rows) {
    struct Cell {
      CountRecord record;
      std::optional<Tracker> tracker;
    };
    std::vector<Cell> cells;
    for (Variant v : variants) {
      for (double iou : iou_thresholds) {
        Cell cell;
        cell.record.row_id = row->id();
        cell.record.variant = v;
        cell.record.iou = iou;
        cell.record.gt = row->gt_count();
        TrackerConfig cfg = base;
        cfg.variant = v;
        cfg.iou_threshold = iou;
        try {
          cell.tracker.emplace(cfg, row->calibration());
        } catch (const Error& e) {
          cell.record.error = e.what();
        }
        cells.push_back(std::move(cell));
      }
    }

    for (std::size_t i = 0; i < row->size(); ++i) {
      std::optional<FrameRecord> frame;
      try {
        frame = row->frame(i);
      } catch (const Error& e) {
        for (Cell& c : cells) {
          if (c.tracker) {
            c.record.error = e.what();
            c.tracker.reset();
          }
        }
        break;
      }
      for (Cell& c : cells) {
        if (!c.tracker) continue;
        try {
          c.tracker->step(*frame);
        } catch (const Error& e) {
          c.record.error = e.what();
          c.tracker.reset();
        }
      }
    }

    for (Cell& c : cells) {
      if (c.tracker) {
        c.record.pred = c.tracker->count();
        if (c.record.gt && *c.record.gt > 0) {
          c.record.ne = normalized_error(*c.record.gt, *c.record.pred);
        }
      } else {
        spdlog::error("sweep: row {} {} iou {} failed: {}", c.record.row_id,
                      to_string(c.record.variant), c.record.iou, c.record.error);
      }
      report.records.push_back(std::move(c.record));
    }
    spdlog::info("sweep: finished row {}", row->id());
  }
  report.aggregates = summarize(report.records);
  return report;
}

namespace {

std::string na_or(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string("NA");
}

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c == '\n' ? ' ' : c;
  }
  return quoted + '"';
}

}  // namespace

void write_report_csv(std::ostream& out, const CountReport& report) {
  out << "row_id,variant,iou,gt,pred,ne\n";
  for (const CountRecord& r : report.records) {
    out << fmt::format("{},{},{:g},{},{},{}\n", csv_field(r.row_id), to_string(r.variant), r.iou,
                       r.gt ? std::to_string(*r.gt) : "NA",
                       r.pred ? std::to_string(*r.pred) : "NA", na_or(r.ne));
  }
  std::vector<std::string> flagged;
  for (const CountRecord& r : report.records) {
    if (!r.pred) {
      out << fmt::format("#err,{},{},{:g},{}\n", csv_field(r.row_id), to_string(r.variant), r.iou,
                         csv_field(r.error));
    }
    if (r.gt && *r.gt == 0 &&
        std::find(flagged.begin(), flagged.end(), r.row_id) == flagged.end()) {
      flagged.push_back(r.row_id);
      out << fmt::format("#flag,{},zero_gt\n", csv_field(r.row_id));
    }
  }
  for (const CountAggregate& a : report.aggregates) {
    out << fmt::format("#agg,{},{:g},{},{},{}\n", to_string(a.variant), a.iou,
                       a.ne ? fmt::format("{:.6f}", a.ne->mean) : "NA",
                       a.ne ? fmt::format("{:.6f}", a.ne->std) : "NA", na_or(a.r2));
  }
}

}  // namespace rowtracker
