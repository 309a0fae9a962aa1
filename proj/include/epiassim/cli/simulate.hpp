#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "epiassim/epimodel.hpp"
#include "epiassim/observation.hpp"

namespace epiassim {

/// From `day` on (relative to the series start) the contact rate is `beta`.
struct ChangePoint {
    int day = 0;
    double beta = 0.0;
};

struct SyntheticTruth {
    EpiParams<double> params{};
    InitialConditions<double> ic{10.0, 10.0, 10.0, 1.0, 0.0};
    std::vector<ChangePoint> change_points;
    ObsConfig obs{};
    int days = 60;
    std::uint64_t seed = 0;
    Date start_date{std::chrono::year{2020} / 3 / 1};
    /// Without noise the counts are the rounded expected reports.
    bool noise = true;

    void validate() const;
    /// Contact rate in force on day [day, day + 1).
    double beta_on(int day) const;
};

struct SyntheticData {
    EpidemicSeries series;
    /// Expected daily counts before reporting and noise.
    Eigen::VectorXd mu_cases;
    Eigen::VectorXd mu_deaths;
};

SyntheticData simulate_synthetic(const SyntheticTruth& truth, double step = kDefaultStep);

nlohmann::ordered_json truth_to_json(const SyntheticTruth& truth);
SyntheticTruth truth_from_json(const nlohmann::json& j);

void save_truth(const std::filesystem::path& path, const SyntheticTruth& truth);
SyntheticTruth load_truth(const std::filesystem::path& path);

} // namespace epiassim
