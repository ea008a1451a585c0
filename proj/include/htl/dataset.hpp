#ifndef HTL_DATASET_HPP
#define HTL_DATASET_HPP

#include <Eigen/Dense>
#include <string>

namespace htl {

enum class RowPolicy { reject, normalize };

// m labeled examples with bounded features (||x_i|| <= 1) and labels in
// [-C, C], plus optional precomputed source-prediction columns S (m x n).
struct Dataset {
  Eigen::MatrixXd X;  // m x d
  Eigen::VectorXd y;  // m
  double C = 1.0;     // label bound
  Eigen::MatrixXd S;  // m x n source predictions, may be 0 x 0

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }
  Eigen::Index source_count() const { return S.cols(); }
  bool has_sources() const { return S.size() > 0; }
};

// Enforces the row invariants. Under `reject`, a violating feature row throws
// with the 1-based row number in the message; under `normalize`, rows with
// ||x|| > 1 are rescaled to unit norm. Labels outside [-C, C] are clipped and
// counted in `clipped_labels`.
void validate_dataset(Dataset& data, RowPolicy policy, int* clipped_labels = nullptr);

// CSV with header y,x1,...,xd[,s1,...,sn]
Dataset load_dataset_csv(const std::string& path, double label_bound,
                         RowPolicy policy = RowPolicy::reject,
                         int* clipped_labels = nullptr);
void save_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace htl

#endif  // HTL_DATASET_HPP
