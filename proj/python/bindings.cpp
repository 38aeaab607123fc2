#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <sstream>

#include <viralscope/common.hpp>
#include <viralscope/labels.hpp>
#include <viralscope/lasso.hpp>
#include <viralscope/partition.hpp>
#include <viralscope/pipeline.hpp>
#include <viralscope/textstats.hpp>
#include <viralscope/virality.hpp>

namespace py = pybind11;
using namespace viralscope;

namespace {

py::dict solve(const std::vector<double>& success_alpha, const std::vector<double>& failure_alpha)
{
    const MleSolution s = solve_virality(success_alpha, failure_alpha);
    py::dict d;
    d["r_hat"] = s.r_hat;
    d["r_max"] = s.r_max;
    d["boundary"] = to_string(s.boundary);
    d["iterations"] = s.iterations;
    return d;
}

py::dict bisect(const std::vector<std::string>& nodes, const std::vector<std::pair<std::string, std::string>>& edges,
                double balance_tol, std::uint64_t seed)
{
    const RetweetNetwork net(nodes, edges);
    const PartitionAssignment a = bisect_partition(net, balance_tol, seed);
    py::dict groups;
    for (std::size_t i = 0; i < a.users.size(); ++i) groups[py::str(a.users[i])] = a.group[i];
    py::dict d;
    d["groups"] = groups;
    d["cut"] = a.cut_size;
    d["balance"] = a.balance;
    return d;
}

// sheets: one dict per coder, tweet_id -> list of 0/1 labels.
std::vector<CoderSheet> to_sheets(const std::vector<std::map<std::string, std::vector<int>>>& sheets,
                                  const std::vector<std::string>& features)
{
    std::vector<CoderSheet> out;
    for (std::size_t k = 0; k < sheets.size(); ++k) {
        CoderSheet s;
        s.coder_id = "c" + std::to_string(k + 1);
        s.features = features;
        for (const auto& [id, row] : sheets[k]) {
            if (row.size() != features.size()) throw InputError("label row " + id + " has the wrong length");
            std::vector<std::uint8_t> r;
            for (int v : row) {
                if (v != 0 && v != 1) throw InputError("labels must be 0 or 1");
                r.push_back(static_cast<std::uint8_t>(v));
            }
            s.rows[id] = std::move(r);
        }
        out.push_back(std::move(s));
    }
    return out;
}

// X and y arrive as plain lists; the numpy/Eigen casters are not used so the
// module works regardless of the installed numpy.
py::dict group_lasso(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                     const std::vector<std::vector<int>>& groups, std::optional<double> lambda, bool standardize,
                     int folds, std::uint64_t seed)
{
    const Eigen::Index n = static_cast<Eigen::Index>(X.size());
    const Eigen::Index p = X.empty() ? 0 : static_cast<Eigen::Index>(X.front().size());
    if (static_cast<Eigen::Index>(y.size()) != n) throw InputError("X and y have different lengths");
    Design d;
    d.X.resize(n, p);
    d.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(X[i].size()) != p) throw InputError("X rows differ in length");
        for (Eigen::Index j = 0; j < p; ++j) d.X(i, j) = X[i][j];
        d.y(i) = y[i];
    }
    const auto& Xm = d.X;
    for (Eigen::Index j = 0; j < Xm.cols(); ++j) d.column_names.push_back("x" + std::to_string(j));
    for (std::size_t g = 0; g < groups.size(); ++g) d.groups.push_back({"g" + std::to_string(g), groups[g]});
    LassoConfig cfg;
    cfg.standardize = standardize;
    cfg.folds = folds;
    cfg.seed = seed;
    const LassoFit fit = lambda ? fit_group_lasso(d, *lambda, cfg) : fit_cv_group_lasso(d, cfg);
    py::dict out;
    out["lambda"] = fit.lambda;
    out["intercept"] = fit.intercept;
    out["beta"] = std::vector<double>(fit.beta.data(), fit.beta.data() + fit.beta.size());
    out["active_groups"] = fit.active_groups;
    out["kkt"] = fit.kkt;
    out["iterations"] = fit.iterations;
    out["cv_curve"] = fit.cv_curve;
    return out;
}

int run(const std::string& stage, const std::string& config_path, std::optional<std::string> out_dir,
        std::optional<int> workers)
{
    PipelineConfig cfg = load_pipeline_config(config_path);
    if (out_dir) cfg.out_dir = *out_dir;
    if (workers) cfg.workers = *workers;
    std::ostringstream log;
    const int rc = run_stage(stage, cfg, log);
    py::print(log.str(), py::arg("end") = "");
    return rc;
}

} // namespace

PYBIND11_MODULE(_viralscope, m)
{
    m.doc() = "Cascade virality, echo-chamber partitioning and group lasso";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("solve_virality", &solve, py::arg("success_alpha"), py::arg("failure_alpha"),
          "Maximum-likelihood virality of one cascade from the activities of its successes and failures.");
    m.def("log_likelihood",
          [](double r, const std::vector<double>& s, const std::vector<double>& f) {
              return cascade_log_likelihood(r, s, f);
          },
          py::arg("r"), py::arg("success_alpha"), py::arg("failure_alpha"));
    m.def("bisect", &bisect, py::arg("nodes"), py::arg("edges"), py::arg("balance_tol") = 0.1,
          py::arg("seed") = 0);
    m.def("krippendorff_alpha",
          [](const std::vector<std::map<std::string, std::vector<int>>>& sheets,
             const std::vector<std::string>& features) { return krippendorff_alpha(to_sheets(sheets, features)); },
          py::arg("sheets"), py::arg("features"));
    m.def("tokenize",
          [](const std::string& text, bool stem) { return tokenize(text, TokenizerOptions{stem}); },
          py::arg("text"), py::arg("stem") = false);
    m.def("group_lasso", &group_lasso, py::arg("X"), py::arg("y"), py::arg("groups"),
          py::arg("lam") = py::none(), py::arg("standardize") = true, py::arg("folds") = 5, py::arg("seed") = 0,
          "Fixed-lambda fit when lam is given, otherwise cross-validated.");
    m.def("run_stage", &run, py::arg("stage"), py::arg("config"), py::arg("out") = py::none(),
          py::arg("workers") = py::none(), "Runs a pipeline stage; returns the exit code.");
    m.attr("__version__") = kVersion;
}
