#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "subexp/errors.hpp"
#include "subexp/fidi.hpp"
#include "subexp/semigroup.hpp"
#include "subexp/upper_rate_operator.hpp"

namespace subexp::io {

inline constexpr const char* model_format = "subexp-model/1";
inline constexpr const char* query_format = "subexp-queries/1";
inline constexpr const char* report_format = "subexp-report/1";

struct Diagnostic {
    std::string path;    ///< JSON pointer of the offending key
    std::size_t line = 0;  ///< 1-based line for syntax errors, 0 otherwise
    std::string reason;
};

/// Carries every diagnostic found while validating a file.
class ParseError : public Error {
public:
    explicit ParseError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

struct NumericConfig {
    double tolerance = 1e-10;
    double step_cap = 0.0;  ///< 0: 1 / rate bound
    std::size_t truncation = 0;  ///< nonneg-integer spaces only
    std::size_t iteration_cap = std::size_t{1} << 20;
};

struct ModelFile {
    StateSpace space = StateSpace::finite(1);
    GeneratorSpec generator;
    InitialUpperExpectation::Spec initial;
    NumericConfig numeric;
    /// Skip rate-matrix validation (lets a deliberately broken generator
    /// reach the axiom check).
    bool unchecked = false;

    UpperRateOperator make_operator() const;
    TransitionEngine make_engine(std::optional<double> tolerance = std::nullopt) const;
    InitialUpperExpectation make_initial() const;
};

ModelFile parse_model_text(const std::string& text);
/// Throws ParseError (I/O failures are reported as a diagnostic too).
ModelFile parse_model(const std::filesystem::path& path);
std::string serialize_model(const ModelFile& model);

struct EvalQuery {
    std::vector<double> grid;
    std::string gamble;
    bool lower = false;
};

struct TransitionQuery {
    double t = 0.0;
    std::string gamble;  ///< expression in coord(0)
    bool lower = false;
};

struct CheckQuery {
    enum class Kind { axioms, semigroup, consistency, rate_condition, downward };
    Kind kind = Kind::axioms;
    std::size_t samples = 100;
    double s = 0.0;
    double t = 0.0;
    std::vector<std::string> gambles;
    std::vector<double> coarse;
    std::vector<double> fine;
    std::vector<double> deltas;
    std::string family;  ///< downward: template with {n}
    std::vector<double> family_grid;
    int count = 0;
    std::string limit;
    std::optional<double> tol;
};

struct ConvergeQuery {
    enum class Kind { hitting, template_family };
    Kind kind = Kind::hitting;
    double horizon = 0.0;
    std::size_t target = 0;
    std::string family;
    std::vector<double> family_grid;
    bool increasing = true;
    int levels = 1;
    std::optional<double> tol;
};

struct Query {
    std::string id;
    std::variant<EvalQuery, TransitionQuery, CheckQuery, ConvergeQuery> body;
};

struct QueryFile {
    std::vector<Query> queries;
};

QueryFile parse_queries_text(const std::string& text);
QueryFile parse_queries(const std::filesystem::path& path);

struct RunOptions {
    std::uint64_t seed = 1;
    std::optional<double> tolerance;
};

/// Executes every query and writes report.json, timing.json and one CSV per
/// converge/rate-condition query into out_dir. Returns 0 when every check
/// passes, 2 otherwise.
int run(const ModelFile& model, const QueryFile& queries, const std::filesystem::path& out_dir,
        const RunOptions& options = {});

/// Replaces every "{n}" in a template expression.
std::string instantiate_template(const std::string& text, int n);

} // namespace subexp::io
