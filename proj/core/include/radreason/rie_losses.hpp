#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

namespace radreason {

/// Detection grid layout: K x K cells, M anchors per cell, n_r radical classes,
/// and the fixed n_c = 5 box-plus-confidence channels.
struct GridShape {
    std::size_t K = 13;
    std::size_t M = 3;
    std::size_t n_r = 1;
    static constexpr std::size_t n_c = 5;

    std::size_t anchors() const { return K * K * M; }
    std::size_t index(std::size_t cell, std::size_t anchor) const { return cell * M + anchor; }

    friend bool operator==(const GridShape&, const GridShape&) = default;
};

struct AnchorBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
};

struct AnchorTarget {
    bool has_radical = false;
    AnchorBox box;
    double confidence = 0.0;
    std::vector<double> classes;  // n_r
};

struct AnchorPrediction {
    AnchorBox box;
    double confidence = 0.0;
    std::vector<double> classes;  // n_r
};

/// Anchors are stored cell-major: index = cell * M + anchor.
struct GridTarget {
    std::vector<AnchorTarget> anchors;
    std::vector<double> structure;  // target distribution over structural relations
};

struct GridPrediction {
    std::vector<AnchorPrediction> anchors;
    std::vector<double> structure;
};

struct LossBreakdown {
    double l_r = 0.0;
    double l_coo = 0.0;
    double l_isR = 0.0;
    double l_s = 0.0;
    double total = 0.0;
};

/// Lower bound applied to every log argument.
inline constexpr double kLogEpsilon = 1e-7;
inline constexpr double kDefaultAbsenceWeight = 0.05;
inline constexpr double kDefaultStructureWeight = 1.0;

// All functions throw Error{shape_mismatch} when the inputs disagree with `shape`.

/// Binary cross-entropy over classes, summed over radical-bearing anchors.
double loss_radical_class(const GridTarget& target, const GridPrediction& pred, const GridShape& shape);

/// Squared position and size errors weighted by (2 - w h) of the target box.
double loss_coordinates(const GridTarget& target, const GridPrediction& pred, const GridShape& shape);

/// Squared confidence error; anchors without a radical are weighted by `lambda`.
double loss_confidence(const GridTarget& target, const GridPrediction& pred, const GridShape& shape,
                       double lambda = kDefaultAbsenceWeight);

/// -(lambda_s / N) * sum q_i log q_hat_i over N structural relations.
double loss_structure(const std::vector<double>& q, const std::vector<double>& q_hat,
                      double lambda_s = kDefaultStructureWeight);

LossBreakdown loss_total(const GridTarget& target, const GridPrediction& pred, const GridShape& shape,
                         double lambda = kDefaultAbsenceWeight, double lambda_s = kDefaultStructureWeight);

/// Partial derivatives of loss_total with respect to every prediction entry,
/// laid out like the prediction.
GridPrediction loss_gradient(const GridTarget& target, const GridPrediction& pred, const GridShape& shape,
                             double lambda = kDefaultAbsenceWeight, double lambda_s = kDefaultStructureWeight);

// Grid documents:
//   {"shape":{"K":..,"M":..,"n_r":..},
//    "anchors":[{"is_radical":bool,"box":[x,y,w,h],"confidence":c,"classes":[...]}, ...],  // K*K*M, cell-major
//    "structure":[...]}
// "is_radical" is read only for targets.
GridShape grid_shape_from_json(const nlohmann::json& document);
GridTarget grid_target_from_json(const nlohmann::json& document, const GridShape& shape);
GridPrediction grid_prediction_from_json(const nlohmann::json& document, const GridShape& shape);
nlohmann::json to_json(const GridShape& shape, const GridTarget& target);
nlohmann::json to_json(const LossBreakdown& losses);

}  // namespace radreason
