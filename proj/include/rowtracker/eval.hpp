#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rowtracker/track.hpp"

namespace rowtracker {

/// |gt - pred| / gt. Throws ZeroGroundTruth for gt == 0.
double normalized_error(int gt, int pred);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population (n divisor)
};

/// Throws EmptyInput.
MeanStd aggregate(std::span<const double> values);

/// 1 - SS_res / SS_tot. Throws DegenerateInput for fewer than two rows,
/// mismatched lengths or constant ground truth.
double r_squared(std::span<const int> gts, std::span<const int> preds);

struct CountRecord {
  std::string row_id;
  Variant variant = Variant::DepthFiltered;
  double iou = 0.0;
  std::optional<int> gt;
  std::optional<int> pred;        // empty when the tracker failed
  std::optional<double> ne;       // empty for gt == 0, unknown gt or failure
  std::string error;              // tracker error message for failed cells
};

struct CountAggregate {
  Variant variant = Variant::DepthFiltered;
  double iou = 0.0;
  std::optional<MeanStd> ne;
  std::optional<double> r2;
  std::size_t rows = 0;
  std::size_t excluded_zero_gt = 0;
  std::size_t failed = 0;
};

struct CountReport {
  std::vector<CountRecord> records;
  std::vector<CountAggregate> aggregates;

  const CountAggregate* find(Variant v, double iou) const;
};

/// Recomputes the aggregate block from the per-row records.
std::vector<CountAggregate> summarize(std::span<const CountRecord> records);

/// Runs one tracker per (row, variant, threshold) over identical inputs.
/// Each row is read once and fed to all of its cells. A failing cell is
/// recorded with its error instead of aborting the sweep. Throws EmptyInput
/// when rows, variants or thresholds are empty.
CountReport sweep(std::span<const FrameSource* const> rows, std::span<const Variant> variants,
                  std::span<const double> iou_thresholds, const TrackerConfig& base = {});

/// CSV: "row_id,variant,iou,gt,pred,ne" records, then
/// "#agg,variant,iou,mean_ne,std_ne,r2" rows. Unknown values print as NA;
/// failed cells add "#err,row_id,variant,iou,message" and rows with gt = 0
/// add one "#flag,row_id,zero_gt" line.
void write_report_csv(std::ostream& out, const CountReport& report);

}  // namespace rowtracker
