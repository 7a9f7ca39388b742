#pragma once

#include <string>
#include <vector>

#include "tgen/graph.hpp"

namespace tgen {

struct SnapshotStats {
  double mean_degree = 0.0;
  double wedge_count = 0.0;
  double triangle_count = 0.0;
  double ple = 0.0;
  double red_entropy = 0.0;
  double lcc_size = 0.0;
  double num_components = 0.0;
  double global_cf = 0.0;
  double mean_betweenness = 0.0;
  double mean_closeness = 0.0;
  bool empty = false;

  static const std::vector<std::string>& names();
  std::vector<double> values() const;
};

// Exact statistics over the incident-node set of the snapshot. Isolated
// (non-incident) rows never appear in a StaticGraph built from edges.
SnapshotStats stats(const StaticGraph& g);

struct ErrorReport {
  std::vector<double> median_abs_err;  // aligned with SnapshotStats::names()
  std::vector<double> mean_abs_err;
  std::vector<double> std_abs_err;
  double overlap_percent = 0.0;
  double wall_time_sec = 0.0;
  int snapshots = 0;
};

struct ReportOptions {
  bool upto = false;       // cumulative snapshots instead of per-timestamp
  double time_tol = 0.5;   // overlap time tolerance, source time units
  // when set, overlap is computed over these label spaces instead of indices
  const std::vector<std::string>* src_labels = nullptr;
  const std::vector<std::string>* gen_labels = nullptr;
  int threads = 1;
};

// Snapshots aligned on the source graph's unique timestamps; generated
// snapshots absent at a source time contribute the full statistic as error.
ErrorReport error_report(const TemporalGraph& src, const TemporalGraph& gen,
                         const ReportOptions& opt = {});

void save_report_csv(const std::string& path, const ErrorReport& r);
void save_report_json(const std::string& path, const ErrorReport& r);

}  // namespace tgen
