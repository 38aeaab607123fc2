#include <viralscope/lasso.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <viralscope/csv.hpp>
#include <viralscope/rng.hpp>

namespace viralscope {

void Design::validate() const
{
    if (X.rows() != y.size()) throw InputError("design: X rows and y length differ");
    if (static_cast<std::size_t>(X.cols()) != column_names.size())
        throw InputError("design: column name count differs from X columns");
    std::vector<int> seen(X.cols(), 0);
    for (const auto& g : groups)
        for (int c : g.columns) {
            if (c < 0 || c >= X.cols()) throw InputError("design: group column out of range");
            ++seen[c];
        }
    for (int c = 0; c < X.cols(); ++c)
        if (seen[c] != 1) throw InputError("design: column " + column_names[c] + " not in exactly one group");
}

Design design_from_features(const FeatureMatrix& m)
{
    const auto authors = m.authors();
    const int nb = static_cast<int>(m.binary_names.size());
    const int p = nb + 2 + static_cast<int>(authors.size());
    const int n = static_cast<int>(m.rows.size());
    Design d;
    d.X = Eigen::MatrixXd::Zero(n, p);
    d.y.resize(n);
    for (const auto& f : m.binary_names) d.column_names.push_back(f);
    d.column_names.push_back("hashtags");
    d.column_names.push_back("mentions");
    for (const auto& a : authors) d.column_names.push_back("author:" + a);
    for (int j = 0; j < nb + 2; ++j) d.groups.push_back({d.column_names[j], {j}});
    if (!authors.empty()) {
        ColumnGroup g{"authors", {}};
        for (int j = nb + 2; j < p; ++j) g.columns.push_back(j);
        d.groups.push_back(std::move(g));
    }
    for (int i = 0; i < n; ++i) {
        const auto& r = m.rows[i];
        for (int j = 0; j < nb; ++j) d.X(i, j) = r.binary[j];
        d.X(i, nb) = static_cast<double>(r.hashtags);
        d.X(i, nb + 1) = static_cast<double>(r.mentions);
        const auto pos = std::lower_bound(authors.begin(), authors.end(), r.author_id) - authors.begin();
        d.X(i, nb + 2 + pos) = 1.0;
        d.y(i) = r.response;
    }
    return d;
}

StandardizedDesign standardize_design(const Design& d, bool standardize)
{
    d.validate();
    const Eigen::Index n = d.X.rows();
    if (n < 2) throw InputError("group lasso needs at least two rows");
    StandardizedDesign s;
    s.mean = d.X.colwise().mean().transpose();
    s.y_mean = d.y.mean();
    s.yc = d.y.array() - s.y_mean;
    s.Z = d.X.rowwise() - s.mean.transpose();
    s.scale = Eigen::VectorXd::Ones(d.X.cols());
    for (Eigen::Index j = 0; j < s.Z.cols(); ++j) {
        const double sd = std::sqrt(s.Z.col(j).squaredNorm() / static_cast<double>(n));
        if (sd < 1e-12) {
            s.Z.col(j).setZero();
            s.scale(j) = 0.0;
        } else if (standardize) {
            s.Z.col(j) /= sd;
            s.scale(j) = 1.0 / sd;
        }
    }
    s.groups = d.groups;
    for (const auto& g : s.groups) s.weights.push_back(std::sqrt(static_cast<double>(g.columns.size())));
    return s;
}

namespace {

Eigen::VectorXd gradient(const StandardizedDesign& s, const Eigen::VectorXd& beta)
{
    const double n = static_cast<double>(s.Z.rows());
    return -(s.Z.transpose() * (s.yc - s.Z * beta)) / n;
}

double smooth_part(const StandardizedDesign& s, const Eigen::VectorXd& beta)
{
    const double n = static_cast<double>(s.Z.rows());
    return 0.5 * (s.yc - s.Z * beta).squaredNorm() / n;
}

double group_norm(const Eigen::VectorXd& v, const ColumnGroup& g)
{
    double ss = 0.0;
    for (int c : g.columns) ss += v(c) * v(c);
    return std::sqrt(ss);
}

double penalty(const StandardizedDesign& s, const Eigen::VectorXd& beta, double lambda)
{
    double p = 0.0;
    for (std::size_t k = 0; k < s.groups.size(); ++k) p += s.weights[k] * group_norm(beta, s.groups[k]);
    return lambda * p;
}

// Block soft-threshold of v with step 1/L.
Eigen::VectorXd prox(const StandardizedDesign& s, const Eigen::VectorXd& v, double lambda, double L)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    for (std::size_t k = 0; k < s.groups.size(); ++k) {
        const auto& g = s.groups[k];
        const double norm = group_norm(v, g);
        const double thresh = lambda * s.weights[k] / L;
        if (norm <= thresh) continue;
        const double shrink = 1.0 - thresh / norm;
        for (int c : g.columns) out(c) = shrink * v(c);
    }
    return out;
}

double power_lipschitz(const StandardizedDesign& s)
{
    const double n = static_cast<double>(s.Z.rows());
    Eigen::VectorXd v = Eigen::VectorXd::Ones(s.Z.cols());
    double est = 0.0;
    for (int i = 0; i < 30; ++i) {
        const double norm = v.norm();
        if (norm == 0.0) return 1.0;
        v /= norm;
        Eigen::VectorXd w = s.Z.transpose() * (s.Z * v) / n;
        est = v.dot(w);
        v = w;
    }
    return std::max(est, 1e-12);
}

std::vector<int> active_of(const StandardizedDesign& s, const Eigen::VectorXd& beta)
{
    std::vector<int> act;
    for (std::size_t k = 0; k < s.groups.size(); ++k)
        if (group_norm(beta, s.groups[k]) > 0.0) act.push_back(static_cast<int>(k));
    return act;
}

} // namespace

double lambda_max(const StandardizedDesign& s)
{
    const Eigen::VectorXd g = gradient(s, Eigen::VectorXd::Zero(s.Z.cols()));
    double lm = 0.0;
    for (std::size_t k = 0; k < s.groups.size(); ++k)
        lm = std::max(lm, group_norm(g, s.groups[k]) / s.weights[k]);
    return lm;
}

double group_lasso_objective(const StandardizedDesign& s, const Eigen::VectorXd& beta_std, double lambda)
{
    return smooth_part(s, beta_std) + penalty(s, beta_std, lambda);
}

double kkt_residual(const StandardizedDesign& s, const Eigen::VectorXd& beta_std, double lambda)
{
    const Eigen::VectorXd corr = -gradient(s, beta_std); // Z'(y - Z b) / n
    double worst = 0.0;
    for (std::size_t k = 0; k < s.groups.size(); ++k) {
        const auto& g = s.groups[k];
        const double bn = group_norm(beta_std, g);
        double res;
        if (bn > 0.0) {
            double ss = 0.0;
            for (int c : g.columns) {
                const double diff = corr(c) - lambda * s.weights[k] * beta_std(c) / bn;
                ss += diff * diff;
            }
            res = std::sqrt(ss);
        } else {
            res = std::max(0.0, group_norm(corr, g) - lambda * s.weights[k]);
        }
        worst = std::max(worst, res);
    }
    return worst;
}

LassoFit fit_standardized(const StandardizedDesign& s, double lambda, const LassoConfig& config,
                          const Eigen::VectorXd* warm_start)
{
    if (!(lambda >= 0.0)) throw InputError("lambda must be nonnegative");
    const Eigen::Index p = s.Z.cols();
    LassoFit fit;
    fit.lambda = lambda;
    fit.groups = s.groups;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
    if (lambda < lambda_max(s) && warm_start && warm_start->size() == p) x = *warm_start;
    for (Eigen::Index j = 0; j < p; ++j)
        if (s.scale(j) == 0.0) x(j) = 0.0;
    double Fx = group_lasso_objective(s, x, lambda);
    fit.objective_trace.push_back(Fx);

    double kkt = 0.0;
    if (lambda >= lambda_max(s)) {
        // Zero is optimal exactly; no iterations needed.
        kkt = kkt_residual(s, x, lambda);
    } else {
        Eigen::VectorXd z = x;
        double t = 1.0;
        double L = power_lipschitz(s);
        bool momentum = false;
        bool converged = false;
        int it = 0;
        while (it < config.max_iter) {
            ++it;
            const Eigen::VectorXd gz = gradient(s, z);
            const double fz = smooth_part(s, z);
            Eigen::VectorXd xn;
            while (true) {
                xn = prox(s, z - gz / L, lambda, L);
                const Eigen::VectorXd dlt = xn - z;
                const double model = fz + gz.dot(dlt) + 0.5 * L * dlt.squaredNorm();
                if (smooth_part(s, xn) <= model + 1e-14 * std::abs(fz)) break;
                L *= 2.0;
            }
            const double Fn = group_lasso_objective(s, xn, lambda);
            if (Fn > Fx) {
                if (momentum) {
                    // Momentum overshot: restart from the last accepted iterate.
                    z = x;
                    t = 1.0;
                    momentum = false;
                    continue;
                }
                // A plain step cannot raise the objective beyond rounding. Take it
                // anyway when the rise is rounding noise, so the iterate keeps
                // moving once the objective can no longer resolve progress.
                if (Fn - Fx > 1e-12 * std::max(std::abs(Fx), 1e-300)) xn = x;
            }
            const double rel = (Fx - std::min(Fn, Fx)) / std::max(std::abs(Fx), 1e-300);
            const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            z = xn + ((t - 1.0) / tn) * (xn - x);
            momentum = t > 1.0;
            x = xn;
            Fx = std::min(Fn, Fx);
            t = tn;
            fit.objective_trace.push_back(Fx);
            if (rel < config.tol) {
                kkt = kkt_residual(s, x, lambda);
                if (kkt <= config.kkt_tol) {
                    converged = true;
                    break;
                }
            }
        }
        fit.iterations = it;
        if (!converged) {
            kkt = kkt_residual(s, x, lambda);
            if (kkt > config.kkt_tol)
                throw LassoNonConvergence("group lasso did not converge in " +
                                              std::to_string(config.max_iter) +
                                              " iterations (lambda=" + csv::format_double(lambda) +
                                              ", kkt=" + csv::format_double(kkt) + ")",
                                          x, kkt);
        }
    }

    fit.beta_std = x;
    fit.beta = x.cwiseProduct(s.scale);
    fit.intercept = s.y_mean - s.mean.dot(fit.beta);
    fit.objective = Fx;
    fit.kkt = kkt;
    fit.active_groups = active_of(s, x);
    return fit;
}

LassoFit fit_group_lasso(const Design& d, double lambda, const LassoConfig& config)
{
    const StandardizedDesign s = standardize_design(d, config.standardize);
    LassoFit fit = fit_standardized(s, lambda, config);
    fit.column_names = d.column_names;
    return fit;
}

std::vector<double> lambda_grid(double lmax, const LassoConfig& config)
{
    if (config.lambda_grid < 1) throw InputError("lambda grid needs at least one point");
    if (!(lmax > 0.0)) return {0.0};
    std::vector<double> grid(config.lambda_grid);
    if (config.lambda_grid == 1) return {lmax};
    const double lo = std::log(lmax * config.lambda_min_ratio), hi = std::log(lmax);
    for (int i = 0; i < config.lambda_grid; ++i)
        grid[i] = std::exp(hi + (lo - hi) * i / (config.lambda_grid - 1));
    grid.front() = lmax;
    return grid;
}

std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed)
{
    if (folds < 2) throw InputError("cross validation needs at least two folds");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(derive_seed(seed, std::string_view("cv-folds")));
    rng.shuffle(perm);
    std::vector<int> fold(n);
    for (std::size_t i = 0; i < n; ++i) fold[perm[i]] = static_cast<int>(i % folds);
    return fold;
}

namespace {

Design subset_rows(const Design& d, const std::vector<Eigen::Index>& rows)
{
    Design out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), d.X.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.X.row(i) = d.X.row(rows[i]);
        out.y(i) = d.y(rows[i]);
    }
    out.column_names = d.column_names;
    out.groups = d.groups;
    return out;
}

} // namespace

CvResult cv_select_lambda(const Design& d, const LassoConfig& config)
{
    if (d.X.rows() < config.folds)
        throw InputError("cross validation: fewer rows than folds, some fold would be empty");
    return cv_select_lambda(d, config, assign_folds(static_cast<std::size_t>(d.X.rows()), config.folds, config.seed));
}

CvResult cv_select_lambda(const Design& d, const LassoConfig& config, const std::vector<int>& fold_of_row)
{
    d.validate();
    if (fold_of_row.size() != static_cast<std::size_t>(d.X.rows()))
        throw InputError("cross validation: fold labels do not match row count");
    const int K = fold_of_row.empty() ? 0 : *std::max_element(fold_of_row.begin(), fold_of_row.end()) + 1;
    if (K < 2) throw InputError("cross validation needs at least two folds");
    std::vector<std::vector<Eigen::Index>> train(K), valid(K);
    for (std::size_t i = 0; i < fold_of_row.size(); ++i)
        for (int k = 0; k < K; ++k)
            (fold_of_row[i] == k ? valid[k] : train[k]).push_back(static_cast<Eigen::Index>(i));
    for (int k = 0; k < K; ++k)
        if (valid[k].empty() || train[k].size() < 2)
            throw InputError("cross validation: fold " + std::to_string(k) + " has no rows");

    CvResult cv;
    cv.lambdas = lambda_grid(lambda_max(standardize_design(d, config.standardize)), config);
    const std::size_t G = cv.lambdas.size();
    std::vector<std::vector<double>> sse(K, std::vector<double>(G, 0.0));

    parallel_for(static_cast<std::size_t>(K), config.workers, [&](std::size_t k) {
        const Design tr = subset_rows(d, train[k]);
        const StandardizedDesign s = standardize_design(tr, config.standardize);
        Eigen::VectorXd warm = Eigen::VectorXd::Zero(d.X.cols());
        for (std::size_t gi = 0; gi < G; ++gi) {
            const LassoFit fit = fit_standardized(s, cv.lambdas[gi], config, &warm);
            warm = fit.beta_std;
            double e = 0.0;
            for (Eigen::Index r : valid[k]) {
                const double pred = fit.intercept + d.X.row(r).dot(fit.beta);
                e += (d.y(r) - pred) * (d.y(r) - pred);
            }
            sse[k][gi] = e;
        }
    });

    cv.mean_mse.assign(G, 0.0);
    for (std::size_t gi = 0; gi < G; ++gi) {
        for (int k = 0; k < K; ++k) cv.mean_mse[gi] += sse[k][gi];
        cv.mean_mse[gi] /= static_cast<double>(d.X.rows());
    }
    cv.best_index = 0;
    for (std::size_t gi = 1; gi < G; ++gi)
        if (cv.mean_mse[gi] < cv.mean_mse[cv.best_index]) cv.best_index = gi;
    cv.lambda_best = cv.lambdas[cv.best_index];
    return cv;
}

LassoFit fit_cv_group_lasso(const Design& d, const LassoConfig& config)
{
    const CvResult cv = cv_select_lambda(d, config);
    const StandardizedDesign s = standardize_design(d, config.standardize);
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(d.X.cols());
    LassoFit fit;
    for (std::size_t gi = 0; gi <= cv.best_index; ++gi) {
        fit = fit_standardized(s, cv.lambdas[gi], config, &warm);
        warm = fit.beta_std;
    }
    fit.column_names = d.column_names;
    for (std::size_t gi = 0; gi < cv.lambdas.size(); ++gi)
        fit.cv_curve.emplace_back(cv.lambdas[gi], cv.mean_mse[gi]);
    return fit;
}

double pct_change(double beta) { return std::expm1(beta) * 100.0; }

CoefficientReport report_coefficients(const LassoFit& fit, std::string_view author_group)
{
    CoefficientReport rep;
    std::vector<char> selected_col(fit.beta.size(), 0);
    std::vector<char> author_col(fit.beta.size(), 0);
    for (std::size_t k = 0; k < fit.groups.size(); ++k) {
        const bool active = std::find(fit.active_groups.begin(), fit.active_groups.end(),
                                      static_cast<int>(k)) != fit.active_groups.end();
        const bool authors = fit.groups[k].name == author_group;
        for (int c : fit.groups[k].columns) {
            selected_col[c] = active;
            author_col[c] = authors;
        }
        if (authors) {
            rep.has_authors = true;
            rep.authors_selected = active;
        }
    }
    bool first_author = true;
    for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
        const double pct = pct_change(fit.beta(j));
        if (author_col[j]) {
            if (first_author || pct < rep.author_min_pct) rep.author_min_pct = pct;
            if (first_author || pct > rep.author_max_pct) rep.author_max_pct = pct;
            first_author = false;
            continue;
        }
        const std::string name = j < static_cast<Eigen::Index>(fit.column_names.size())
                                     ? fit.column_names[j]
                                     : "x" + std::to_string(j);
        rep.features.push_back({name, fit.beta(j), pct, selected_col[j] != 0});
    }
    return rep;
}

void write_regress_csv(std::ostream& out, const CoefficientReport& report)
{
    out << "feature,beta,pct_change,selected\n";
    for (const auto& r : report.features)
        out << r.feature << ',' << csv::format_fixed(r.beta, 6) << ',' << csv::format_fixed(r.pct_change, 1)
            << ',' << (r.selected ? "true" : "false") << '\n';
    if (report.has_authors)
        out << "authors," << csv::format_fixed(report.author_min_pct, 1) << ','
            << csv::format_fixed(report.author_max_pct, 1) << ','
            << (report.authors_selected ? "true" : "false") << '\n';
}

void write_cv_curve_csv(std::ostream& out, const CvResult& cv)
{
    out << "lambda,mean_val_mse\n";
    for (std::size_t i = 0; i < cv.lambdas.size(); ++i)
        out << csv::format_double(cv.lambdas[i]) << ',' << csv::format_double(cv.mean_mse[i]) << '\n';
}

} // namespace viralscope
