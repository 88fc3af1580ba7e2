// Batch front end: subexp eval --model M --queries Q --out DIR [--seed S] [--tol T]

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "subexp/model_io.hpp"

namespace {

void print_diagnostics(const char* file, const subexp::io::ParseError& e) {
    for (const auto& d : e.diagnostics()) {
        std::cerr << file << ':';
        if (d.line) std::cerr << d.line << ':';
        std::cerr << ' ' << (d.path.empty() ? "/" : d.path) << ": " << d.reason << '\n';
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sublinear expectations of countable-state uncertain processes"};
    app.require_subcommand(1);

    std::string model_path, query_path, out_dir;
    std::uint64_t seed = 1;
    std::optional<double> tol;
    auto* eval = app.add_subcommand("eval", "Run a query file against a model");
    eval->add_option("--model", model_path, "Model JSON file")->required();
    eval->add_option("--queries", query_path, "Query JSON file")->required();
    eval->add_option("--out", out_dir, "Output directory")->required();
    eval->add_option("--seed", seed, "Seed for sampled checks");
    eval->add_option("--tol", tol, "Override the model's engine tolerance")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    subexp::io::ModelFile model;
    subexp::io::QueryFile queries;
    try {
        model = subexp::io::parse_model(model_path);
    } catch (const subexp::io::ParseError& e) {
        print_diagnostics(model_path.c_str(), e);
        return 1;
    }
    try {
        queries = subexp::io::parse_queries(query_path);
    } catch (const subexp::io::ParseError& e) {
        print_diagnostics(query_path.c_str(), e);
        return 1;
    }

    try {
        const int code = subexp::io::run(model, queries, out_dir, {seed, tol});
        std::fprintf(stderr, "%zu queries, report in %s/report.json%s\n", queries.queries.size(),
                     out_dir.c_str(), code == 0 ? "" : " (some checks failed)");
        return code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
