#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include <viralscope/common.hpp>
#include <viralscope/labels.hpp>

namespace viralscope {

struct ColumnGroup {
    std::string name;
    std::vector<int> columns;
};

/// Regression design: response y on columns of X, partitioned into groups.
struct Design {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> column_names;
    std::vector<ColumnGroup> groups;

    /// Throws InputError unless every column sits in exactly one group.
    void validate() const;
};

/// Binary features, hashtags and mentions each form their own group; all
/// author indicators ("author:<id>") form the group "authors".
Design design_from_features(const FeatureMatrix& m);

struct LassoConfig {
    int lambda_grid = 100;          // geometric grid over [lambda_max * min_ratio, lambda_max]
    double lambda_min_ratio = 1e-4;
    int folds = 5;
    double tol = 1e-6;              // relative objective change
    double kkt_tol = 1e-7;          // required KKT residual at convergence
    int max_iter = 10000;
    bool standardize = true;
    std::uint64_t seed = 0;         // fold shuffling
    int workers = 1;
};

/// Centered (and optionally scaled) copy of a design. Zero-variance columns
/// become all-zero and always get a zero coefficient.
struct StandardizedDesign {
    Eigen::MatrixXd Z;
    Eigen::VectorXd yc;
    Eigen::VectorXd mean;
    Eigen::VectorXd scale; // original = standardized / scale; 0 marks a dropped column
    double y_mean = 0.0;
    std::vector<ColumnGroup> groups;
    std::vector<double> weights; // sqrt(group size)
};

StandardizedDesign standardize_design(const Design& d, bool standardize);

/// Smallest lambda at which every group is zero: max_g |Z_g' yc| / (n sqrt(p_g)).
double lambda_max(const StandardizedDesign& s);

/// (1/2n)|yc - Z b|^2 + lambda sum_g sqrt(p_g) |b_g|.
double group_lasso_objective(const StandardizedDesign& s, const Eigen::VectorXd& beta_std, double lambda);

/// Largest per-group violation of the optimality conditions.
double kkt_residual(const StandardizedDesign& s, const Eigen::VectorXd& beta_std, double lambda);

struct LassoFit {
    double lambda = 0.0;
    double intercept = 0.0;
    Eigen::VectorXd beta;       // original scale
    Eigen::VectorXd beta_std;   // solver scale
    std::vector<int> active_groups;
    int iterations = 0;
    double objective = 0.0;
    double kkt = 0.0;
    std::vector<double> objective_trace; // one entry per accepted iterate
    std::vector<std::string> column_names;
    std::vector<ColumnGroup> groups;
    std::vector<std::pair<double, double>> cv_curve; // (lambda, mean validation MSE)
};

class LassoNonConvergence : public NumericalError {
public:
    LassoNonConvergence(const std::string& what, Eigen::VectorXd last, double residual)
        : NumericalError(what), last_beta_std(std::move(last)), kkt(residual) {}
    Eigen::VectorXd last_beta_std;
    double kkt;
};

/// Proximal gradient with backtracking and momentum restarts; each accepted
/// iterate lowers the objective. Stops when the relative objective change
/// is below config.tol and the KKT residual is below config.kkt_tol.
/// Throws LassoNonConvergence after config.max_iter iterations.
LassoFit fit_standardized(const StandardizedDesign& s, double lambda, const LassoConfig& config,
                          const Eigen::VectorXd* warm_start = nullptr);

LassoFit fit_group_lasso(const Design& d, double lambda, const LassoConfig& config);

std::vector<double> lambda_grid(double lambda_max, const LassoConfig& config);

/// Seeded shuffle, then round-robin fold labels.
std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed);

struct CvResult {
    std::vector<double> lambdas;   // decreasing
    std::vector<double> mean_mse;  // pooled validation squared error per lambda
    std::size_t best_index = 0;
    double lambda_best = 0.0;
};

/// K-fold CV over the grid with warm starts down the path; the best lambda
/// minimises validation error, ties going to the larger lambda.
CvResult cv_select_lambda(const Design& d, const LassoConfig& config);
CvResult cv_select_lambda(const Design& d, const LassoConfig& config, const std::vector<int>& fold_of_row);

/// CV selection followed by a warm-started refit on all rows.
LassoFit fit_cv_group_lasso(const Design& d, const LassoConfig& config);

/// (e^beta - 1) * 100
double pct_change(double beta);

struct CoefficientRow {
    std::string feature;
    double beta = 0.0;
    double pct_change = 0.0;
    bool selected = false;
};

struct CoefficientReport {
    std::vector<CoefficientRow> features; // every non-author column
    bool has_authors = false;
    double author_min_pct = 0.0;
    double author_max_pct = 0.0;
    bool authors_selected = false;
};

CoefficientReport report_coefficients(const LassoFit& fit, std::string_view author_group = "authors");

/// "feature,beta,pct_change,selected" plus "authors,<min_pct>,<max_pct>,<selected>".
void write_regress_csv(std::ostream& out, const CoefficientReport& report);

/// "lambda,mean_val_mse"
void write_cv_curve_csv(std::ostream& out, const CvResult& cv);

} // namespace viralscope
