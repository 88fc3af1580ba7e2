#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "subexp/model_io.hpp"
#include "subexp/operator_checks.hpp"

namespace subexp::io {

using ordered = nlohmann::ordered_json;

namespace {

std::string csv_name(const std::string& id) {
    std::string out;
    for (char c : id) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out + ".csv";
}

void write_csv(const std::filesystem::path& path, const char* x_name, const char* y_name,
               const std::vector<double>& xs, const std::vector<double>& ys) {
    std::ofstream out(path, std::ios::binary);
    out << x_name << ',' << y_name << '\n';
    char buf[64];
    for (std::size_t k = 0; k < xs.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", xs[k], ys[k]);
        out << buf;
    }
}

ordered step_json(const EvaluationStats& s) {
    return ordered{{"engine_calls", s.engine_calls},
                   {"distinct_residuals", s.distinct_residuals},
                   {"max_step_error", s.max_step_error},
                   {"edge_flag", s.edge_flag}};
}

ordered step_json(const StepReport& r) {
    return ordered{{"n_steps", r.n_steps},
                   {"estimated_error", r.estimated_error},
                   {"edge_flag", r.edge_flag},
                   {"clean_states", r.clean_states},
                   {"converged", r.converged}};
}

// Per-grid accumulation: the transition operators are nonexpansive, so
// per-step errors add up along the recursion.
double eval_error(const EvaluationStats& s, std::size_t intervals) {
    return s.max_step_error * static_cast<double>(std::max<std::size_t>(intervals, 1));
}

std::size_t grid_intervals(const TimeGrid& g) { return g.size() - (g[0] == 0.0 ? 1 : 0); }

Gamble gamble_of(const std::string& text, const StateSpace& space) {
    const auto e = parse_expression(text);
    std::vector<double> values(space.size());
    for (std::size_t z = 0; z < space.size(); ++z) {
        const std::size_t code = z;
        values[z] = evaluate(*e, std::span<const std::size_t>(&code, 1));
    }
    double tail = 0.0;
    if (space.is_truncated()) {
        const std::size_t code = space.size();
        tail = evaluate(*e, std::span<const std::size_t>(&code, 1));
    }
    return Gamble(std::move(values), tail);
}

struct Context {
    const ModelFile& model;
    const TransitionEngine& engine;
    const InitialUpperExpectation& initial;
    const std::filesystem::path& out_dir;
    const RunOptions& options;
};

// Fills `rec` and returns whether the query passed.
bool run_query(const Context& ctx, const Query& q, ordered& rec) {
    const double eps = ctx.engine.tolerance();
    return std::visit(
        [&](const auto& body) -> bool {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, EvalQuery>) {
                rec["kind"] = "eval";
                rec["input"] = ordered{{"grid", body.grid}, {"gamble", body.gamble}, {"lower", body.lower}};
                const FinitaryGamble f(TimeGrid(body.grid), parse_expression(body.gamble));
                EvaluationStats stats;
                const double v = body.lower ? evaluate_lower(ctx.initial, ctx.engine, f, &stats)
                                            : evaluate_upper(ctx.initial, ctx.engine, f, &stats);
                rec["value"] = v;
                rec["error_estimate"] = eval_error(stats, grid_intervals(f.grid()));
                rec["step_report"] = step_json(stats);
                return true;
            } else if constexpr (std::is_same_v<T, TransitionQuery>) {
                rec["kind"] = "transition";
                rec["input"] = ordered{{"t", body.t}, {"gamble", body.gamble}, {"lower", body.lower}};
                Gamble f = gamble_of(body.gamble, ctx.engine.space());
                if (body.lower) f *= -1.0;
                Evolution ev = ctx.engine.apply(body.t, f);
                if (body.lower) ev.value *= -1.0;
                rec["value"] = ev.value.values();
                if (ctx.engine.space().is_truncated()) rec["value_tail"] = ev.value.tail();
                rec["error_estimate"] = ev.report.estimated_error;
                rec["step_report"] = step_json(ev.report);
                return true;
            } else if constexpr (std::is_same_v<T, CheckQuery>) {
                rec["kind"] = "check";
                CheckReport report;
                ordered input;
                switch (body.kind) {
                case CheckQuery::Kind::axioms: {
                    input = ordered{{"check", "axioms"}, {"samples", body.samples}};
                    const AxiomReport ax = check_upper_rate_axioms(ctx.engine.generator(), body.samples,
                                                                   ctx.options.seed);
                    rec["input"] = input;
                    rec["passed"] = ax.passed;
                    rec["value"] = std::max({ax.worst_constant, ax.worst_subadditivity, ax.worst_homogeneity,
                                             ax.worst_pmp});
                    rec["error_estimate"] = 0.0;
                    rec["worst"] = ordered{{"constant", ax.worst_constant},
                                           {"subadditivity", ax.worst_subadditivity},
                                           {"homogeneity", ax.worst_homogeneity},
                                           {"pmp", ax.worst_pmp}};
                    rec["samples"] = ax.samples;
                    return ax.passed;
                }
                case CheckQuery::Kind::semigroup: {
                    input = ordered{{"check", "semigroup"}, {"s", body.s}, {"t", body.t}, {"gambles", body.gambles}};
                    std::vector<Gamble> fs;
                    for (const auto& g : body.gambles) fs.push_back(gamble_of(g, ctx.engine.space()));
                    report = check_semigroup_law(ctx.engine, body.s, body.t, fs, body.tol.value_or(10.0 * eps));
                    break;
                }
                case CheckQuery::Kind::consistency: {
                    input = ordered{{"check", "consistency"}, {"coarse", body.coarse}, {"fine", body.fine},
                                    {"gamble", body.gambles.front()}};
                    const TimeGrid coarse(body.coarse);
                    report = check_consistency(ctx.initial, ctx.engine, coarse, TimeGrid(body.fine),
                                               FinitaryGamble(coarse, parse_expression(body.gambles.front())),
                                               body.tol.value_or(10.0 * eps));
                    break;
                }
                case CheckQuery::Kind::rate_condition: {
                    input = ordered{{"check", "rate-condition"}, {"t", body.t}, {"deltas", body.deltas}};
                    const RateProbe probe = rate_condition_probe(ctx.initial, ctx.engine, body.t, body.deltas,
                                                                 body.tol.value_or(1e-9));
                    report = probe.report;
                    rec["ratios"] = probe.ratios;
                    rec["rate_bound"] = probe.rate_bound;
                    write_csv(ctx.out_dir / csv_name(q.id), "delta", "ratio", probe.deltas, probe.ratios);
                    break;
                }
                case CheckQuery::Kind::downward: {
                    input = ordered{{"check", "downward"}, {"family", body.family}, {"grid", body.family_grid},
                                    {"count", body.count}, {"limit", body.limit}};
                    const TimeGrid grid(body.family_grid);
                    const auto family = [&](int n) {
                        return FinitaryGamble(grid, parse_expression(instantiate_template(body.family, n)));
                    };
                    const DownwardProbe probe =
                        downward_probe(ctx.initial, ctx.engine, family, body.count,
                                       FinitaryGamble(grid, parse_expression(body.limit)),
                                       body.tol.value_or(1e-6), ctx.options.seed);
                    report = probe.report;
                    rec["estimates"] = probe.estimates;
                    rec["limit_value"] = probe.limit_value;
                    break;
                }
                }
                rec["input"] = input;
                rec["passed"] = report.passed;
                rec["value"] = report.worst;
                rec["error_estimate"] = 10.0 * eps;
                rec["tolerance"] = report.tolerance;
                rec["cases"] = report.cases;
                if (!report.detail.empty()) rec["detail"] = report.detail;
                return report.passed;
            } else {
                rec["kind"] = "converge";
                const double tol = body.tol.value_or(1e-3);
                GridLimit limit;
                if (body.kind == ConvergeQuery::Kind::hitting) {
                    rec["input"] = ordered{{"family", "hitting"}, {"horizon", body.horizon},
                                           {"target", body.target}, {"levels", body.levels}};
                    limit = grid_limit(ctx.initial, ctx.engine,
                                       [&](int level) { return hitting_gamble(body.horizon, body.target, level); },
                                       body.levels, Monotonicity::increasing, tol, ctx.options.seed);
                } else {
                    rec["input"] = ordered{{"family", "template"}, {"template", body.family},
                                           {"grid", body.family_grid},
                                           {"direction", body.increasing ? "increasing" : "decreasing"},
                                           {"levels", body.levels}};
                    const TimeGrid grid(body.family_grid);
                    limit = grid_limit(
                        ctx.initial, ctx.engine,
                        [&](int n) { return FinitaryGamble(grid, parse_expression(instantiate_template(body.family, n))); },
                        body.levels,
                        body.increasing ? Monotonicity::increasing : Monotonicity::decreasing, tol, ctx.options.seed);
                }
                const auto& est = limit.estimates;
                rec["estimates"] = est;
                rec["value"] = est.back();
                rec["error_estimate"] = est.size() >= 2 ? std::abs(est.back() - est[est.size() - 2]) : 0.0;
                rec["converged"] = limit.converged;
                rec["converged_level"] = limit.converged_level;
                rec["monotone"] = limit.monotone;
                rec["passed"] = limit.monotone;
                std::vector<double> levels;
                for (int l = 1; l <= body.levels; ++l) levels.push_back(l);
                write_csv(ctx.out_dir / csv_name(q.id), "level", "estimate", levels, est);
                return limit.monotone;
            }
        },
        q.body);
}

} // namespace

int run(const ModelFile& model, const QueryFile& queries, const std::filesystem::path& out_dir,
        const RunOptions& options) {
    std::filesystem::create_directories(out_dir);
    ordered report;
    report["format"] = report_format;
    report["seed"] = options.seed;
    report["tolerance"] = options.tolerance.value_or(model.numeric.tolerance);
    report["model"] = ordered::parse(serialize_model(model));
    ordered records = ordered::array();
    ordered timings = ordered::array();
    bool all_passed = true;

    std::optional<TransitionEngine> engine;
    std::optional<InitialUpperExpectation> initial;
    std::string setup_error;
    try {
        engine.emplace(model.make_engine(options.tolerance));
        initial.emplace(model.make_initial());
    } catch (const Error& e) {
        setup_error = e.what();
    }

    for (const auto& q : queries.queries) {
        ordered rec;
        rec["id"] = q.id;
        const auto start = std::chrono::steady_clock::now();
        bool passed = false;
        if (!setup_error.empty()) {
            rec["status"] = "error";
            rec["error"] = setup_error;
        } else {
            try {
                passed = run_query(Context{model, *engine, *initial, out_dir, options}, q, rec);
                rec["status"] = passed ? "ok" : "failed";
            } catch (const std::exception& e) {
                rec["status"] = "error";
                rec["error"] = e.what();
            }
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all_passed = all_passed && passed;
        records.push_back(std::move(rec));
        timings.push_back(ordered{{"id", q.id}, {"wall_seconds", wall}});
    }
    report["queries"] = records;

    std::ofstream(out_dir / "report.json", std::ios::binary) << report.dump(2) << '\n';
    std::ofstream(out_dir / "timing.json", std::ios::binary)
        << ordered{{"format", "subexp-timing/1"}, {"queries", timings}}.dump(2) << '\n';
    return all_passed ? 0 : 2;
}

} // namespace subexp::io
