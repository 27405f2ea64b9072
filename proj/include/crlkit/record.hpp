#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace crl {

using Eigen::VectorXd;

/// One R_ave measurement.
struct EvalPoint {
  std::int64_t global_iteration = 0;
  int task_index = 0;  // task being trained when the evaluation ran
  double r_ave = 0.0;
};

/// One policy iteration of training.
struct IterationLog {
  int task_index = 0;
  int task_id = 0;
  int iteration = 0;
  std::int64_t global_iteration = 0;
  int head = 0;
  double mean_return = 0.0;   // undiscounted, averaged over the batch
  double distill_loss = 0.0;  // L_D before the update; 0 without a teacher
};

/// Context decision for one task.
struct TraceRecord {
  int task_index = 0;
  int task_id = 0;
  int true_cluster = 0;
  VectorXd feature;    // empty in naive mode
  VectorXd posterior;  // empty when no inference ran
  bool is_new = false;
  int z_star = 0;
  int K_after = 1;
  int expanded_from = -2;  // -2 no expansion, -1 fresh head, else copied head
};

struct RunRecord {
  std::vector<EvalPoint> r_ave_series;
  double r_bar_ave = 0.0;
  std::vector<int> assignments;
  int K_T = 0;
  std::vector<double> forward_transfer;  // first-iteration mean training return per task
  std::vector<TraceRecord> trace;
  std::vector<IterationLog> train_log;
  std::string config_echo;
  double wall_time = 0.0;  // seconds; excluded from every deterministic output
};

/// Mean of the stored R_ave values. Throws InputError on an empty series.
double aggregate(const RunRecord& record);

/// Mean of the per-iteration training return over the first `n` iterations
/// of every task from `first_task` on.
double early_training_return(const RunRecord& record, int n, int first_task = 0);

}  // namespace crl
