#pragma once

// Run configuration: strict JSON parsing, validation and model instantiation.

#include "trimap/core.hpp"
#include "trimap/models.hpp"
#include "trimap/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trimap::config {

/// Validation failure. `field()` is a dotted path such as "tolerances.newton".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message);
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class ModelKind { LeslieGower, Logistic, Ricker, Custom };

[[nodiscard]] std::string_view to_string(ModelKind m) noexcept;

struct Tolerances {
    double newton = 1e-12;      // fixed-point residual
    double dedup = 1e-7;        // root merging and cycle identification
    double orbit = 1e-10;       // |X_n - X_{n+p}| stop rule in simulate
    double convergence = 1e-6;  // sample-to-target distance in verify-global
    double cluster = 1e-6;      // omega-limit clustering
    double center = 1e-8;       // | |lambda| - 1 | below this is a center direction
};

struct ScanAxis {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 1;

    [[nodiscard]] double value(std::size_t i) const noexcept;
};

// Models outside the bundled three.
//   logistic-1d: x -> mu x (1 - x) on [0, 1]
//   identity:    the identity map on [0, 1]^dim
struct CustomModel {
    std::string kind = "logistic-1d";
    double mu = 3.3;
    std::size_t dim = 1;
};

struct RunConfig {
    ModelKind model = ModelKind::LeslieGower;
    models::LeslieGowerParams leslie_gower;
    models::LogisticParams logistic;
    models::RickerGeneralParams ricker = models::to_general(models::RickerParams{});
    CustomModel custom;

    std::optional<Box> box;         // root-search box
    std::optional<Box> sample_box;  // verify-global sampling box
    std::optional<Point> x0;
    std::size_t phase = 0;
    std::size_t steps = 1000;
    std::vector<std::size_t> grid{50};
    std::vector<std::size_t> search_grid{64};
    Tolerances tol;
    std::size_t max_iters = 10000;
    std::optional<std::size_t> period;  // prime period searched by analyze; default p
    bool targets_all = false;           // verify-global targets: sinks only unless "all"
    std::vector<ScanAxis> scan;
    bool scan_period2 = false;
    std::optional<std::string> output_path;
    report::Format format = report::Format::Csv;
    std::uint64_t seed = 0;
    double jitter = 0.0;

    /// Cross-field checks; throws ConfigError.
    void validate() const;
};

[[nodiscard]] RunConfig parse_config_text(std::string_view text);
/// Throws ConfigError for content problems, std::ios_base::failure when unreadable.
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Sets a named model parameter (scan axes use the same names); throws ConfigError.
void set_parameter(RunConfig& cfg, std::string_view name, double value);

struct ModelInstance {
    TriangularSystem system;
    Box search_box;
    Box sample_box;
    Point x0;
    std::vector<Point> references;  // closed-form points of the composition at phase 0
};

/// Builds the system and default boxes; throws ConfigError for invalid parameters.
[[nodiscard]] ModelInstance instantiate(const RunConfig& cfg);

}  // namespace trimap::config
