#include "radreason/rie_losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "radreason/error.hpp"

namespace radreason {

using nlohmann::json;

namespace {

void check_shape(const GridTarget& target, const GridPrediction& pred, const GridShape& shape) {
    if (shape.K < 1 || shape.M < 1 || shape.n_r < 1) {
        throw Error(ErrorKind::shape_mismatch, "grid shape needs K, M, n_r >= 1");
    }
    if (target.anchors.size() != shape.anchors() || pred.anchors.size() != shape.anchors()) {
        throw Error(ErrorKind::shape_mismatch, "expected " + std::to_string(shape.anchors()) + " anchors (K*K*M)");
    }
    for (std::size_t a = 0; a < shape.anchors(); ++a) {
        if (target.anchors[a].classes.size() != shape.n_r || pred.anchors[a].classes.size() != shape.n_r) {
            throw Error(ErrorKind::shape_mismatch,
                        "anchor " + std::to_string(a) + ": expected " + std::to_string(shape.n_r) + " classes");
        }
    }
}

double safe_log(double v) { return std::log(std::max(v, kLogEpsilon)); }

double bce(double p, double p_hat) {
    double term = 0.0;
    if (p > 0.0) term -= p * safe_log(p_hat);
    if (p < 1.0) term -= (1.0 - p) * safe_log(1.0 - p_hat);
    return term;
}

double bce_grad(double p, double p_hat) {
    double g = 0.0;
    if (p > 0.0 && p_hat > kLogEpsilon) g -= p / p_hat;
    if (p < 1.0 && 1.0 - p_hat > kLogEpsilon) g += (1.0 - p) / (1.0 - p_hat);
    return g;
}

double box_weight(const AnchorBox& target) { return 2.0 - target.w * target.h; }

double sq(double v) { return v * v; }

}  // namespace

double loss_radical_class(const GridTarget& target, const GridPrediction& pred, const GridShape& shape) {
    check_shape(target, pred, shape);
    double sum = 0.0;
    for (std::size_t a = 0; a < shape.anchors(); ++a) {
        const auto& t = target.anchors[a];
        if (!t.has_radical) continue;
        for (std::size_t r = 0; r < shape.n_r; ++r) sum += bce(t.classes[r], pred.anchors[a].classes[r]);
    }
    return sum;
}

double loss_coordinates(const GridTarget& target, const GridPrediction& pred, const GridShape& shape) {
    check_shape(target, pred, shape);
    double sum = 0.0;
    for (std::size_t a = 0; a < shape.anchors(); ++a) {
        const auto& t = target.anchors[a];
        if (!t.has_radical) continue;
        const auto& p = pred.anchors[a].box;
        const double weight = box_weight(t.box);
        sum += weight * (sq(t.box.x - p.x) + sq(t.box.y - p.y));
        sum += weight * (sq(t.box.w - p.w) + sq(t.box.h - p.h));
    }
    return sum;
}

double loss_confidence(const GridTarget& target, const GridPrediction& pred, const GridShape& shape, double lambda) {
    check_shape(target, pred, shape);
    if (lambda < 0.0) throw Error(ErrorKind::invalid_params, "lambda must be >= 0");
    double present = 0.0;
    double absent = 0.0;
    for (std::size_t a = 0; a < shape.anchors(); ++a) {
        const double err = sq(target.anchors[a].confidence - pred.anchors[a].confidence);
        (target.anchors[a].has_radical ? present : absent) += err;
    }
    return present + lambda * absent;
}

double loss_structure(const std::vector<double>& q, const std::vector<double>& q_hat, double lambda_s) {
    if (q.size() != q_hat.size()) {
        throw Error(ErrorKind::shape_mismatch, "structure distributions differ in length (" +
                                                   std::to_string(q.size()) + " vs " + std::to_string(q_hat.size()) +
                                                   ")");
    }
    if (q.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0.0) sum += q[i] * safe_log(q_hat[i]);
    }
    return (lambda_s / static_cast<double>(q.size())) * (0.0 - sum);
}

LossBreakdown loss_total(const GridTarget& target, const GridPrediction& pred, const GridShape& shape, double lambda,
                         double lambda_s) {
    LossBreakdown out;
    out.l_r = loss_radical_class(target, pred, shape);
    out.l_coo = loss_coordinates(target, pred, shape);
    out.l_isR = loss_confidence(target, pred, shape, lambda);
    out.l_s = loss_structure(target.structure, pred.structure, lambda_s);
    out.total = out.l_r + out.l_coo + out.l_isR + out.l_s;
    return out;
}

GridPrediction loss_gradient(const GridTarget& target, const GridPrediction& pred, const GridShape& shape,
                             double lambda, double lambda_s) {
    check_shape(target, pred, shape);
    if (target.structure.size() != pred.structure.size()) {
        throw Error(ErrorKind::shape_mismatch, "structure distributions differ in length");
    }
    GridPrediction grad;
    grad.anchors.resize(shape.anchors());
    for (std::size_t a = 0; a < shape.anchors(); ++a) {
        const auto& t = target.anchors[a];
        const auto& p = pred.anchors[a];
        auto& g = grad.anchors[a];
        g.classes.assign(shape.n_r, 0.0);
        const double gate = t.has_radical ? 1.0 : lambda;
        g.confidence = -2.0 * gate * (t.confidence - p.confidence);
        if (!t.has_radical) continue;
        for (std::size_t r = 0; r < shape.n_r; ++r) g.classes[r] = bce_grad(t.classes[r], p.classes[r]);
        const double weight = box_weight(t.box);
        g.box.x = -2.0 * weight * (t.box.x - p.box.x);
        g.box.y = -2.0 * weight * (t.box.y - p.box.y);
        g.box.w = -2.0 * weight * (t.box.w - p.box.w);
        g.box.h = -2.0 * weight * (t.box.h - p.box.h);
    }
    const std::size_t n = target.structure.size();
    grad.structure.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (target.structure[i] > 0.0 && pred.structure[i] > kLogEpsilon) {
            grad.structure[i] = -(lambda_s / static_cast<double>(n)) * target.structure[i] / pred.structure[i];
        }
    }
    return grad;
}

namespace {

double unit_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw Error(ErrorKind::schema, where + ": expected a number");
    const double d = v.get<double>();
    if (!(d >= 0.0 && d <= 1.0)) throw Error(ErrorKind::schema, where + ": value outside [0, 1]");
    return d;
}

std::vector<double> unit_vector(const json& v, std::size_t expected, const std::string& where) {
    if (!v.is_array() || (expected != 0 && v.size() != expected)) {
        throw Error(ErrorKind::shape_mismatch, where + ": expected an array of " + std::to_string(expected));
    }
    std::vector<double> out;
    for (const auto& e : v) out.push_back(unit_number(e, where));
    return out;
}

const json& anchors_of(const json& document, const GridShape& shape) {
    auto it = document.find("anchors");
    if (it == document.end() || !it->is_array()) throw Error(ErrorKind::schema, "grid: missing \"anchors\" array");
    if (it->size() != shape.anchors()) {
        throw Error(ErrorKind::shape_mismatch,
                    "grid: expected " + std::to_string(shape.anchors()) + " anchors, got " + std::to_string(it->size()));
    }
    return *it;
}

AnchorBox read_box(const json& anchor, const std::string& where) {
    auto it = anchor.find("box");
    if (it == anchor.end()) return {};
    const auto v = unit_vector(*it, 4, where + ".box");
    return {v[0], v[1], v[2], v[3]};
}

std::vector<double> read_structure(const json& document) {
    auto it = document.find("structure");
    if (it == document.end()) return {};
    return unit_vector(*it, 0, "grid.structure");
}

}  // namespace

GridShape grid_shape_from_json(const json& document) {
    auto it = document.find("shape");
    if (it == document.end() || !it->is_object()) throw Error(ErrorKind::schema, "grid: missing \"shape\" object");
    GridShape shape;
    try {
        shape.K = it->at("K").get<std::size_t>();
        shape.M = it->at("M").get<std::size_t>();
        shape.n_r = it->at("n_r").get<std::size_t>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::schema, std::string("grid.shape: ") + e.what());
    }
    if (shape.K < 1 || shape.M < 1 || shape.n_r < 1) throw Error(ErrorKind::schema, "grid.shape: K, M, n_r must be >= 1");
    return shape;
}

GridTarget grid_target_from_json(const json& document, const GridShape& shape) {
    GridTarget target;
    const json& anchors = anchors_of(document, shape);
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        const std::string where = "anchor " + std::to_string(a);
        const json& ja = anchors[a];
        AnchorTarget t;
        t.has_radical = ja.value("is_radical", false);
        t.box = read_box(ja, where);
        t.confidence = ja.contains("confidence") ? unit_number(ja["confidence"], where) : (t.has_radical ? 1.0 : 0.0);
        t.classes = ja.contains("classes") ? unit_vector(ja["classes"], shape.n_r, where + ".classes")
                                           : std::vector<double>(shape.n_r, 0.0);
        target.anchors.push_back(std::move(t));
    }
    target.structure = read_structure(document);
    return target;
}

GridPrediction grid_prediction_from_json(const json& document, const GridShape& shape) {
    GridPrediction pred;
    const json& anchors = anchors_of(document, shape);
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        const std::string where = "anchor " + std::to_string(a);
        const json& ja = anchors[a];
        AnchorPrediction p;
        p.box = read_box(ja, where);
        p.confidence = ja.contains("confidence") ? unit_number(ja["confidence"], where) : 0.0;
        p.classes = ja.contains("classes") ? unit_vector(ja["classes"], shape.n_r, where + ".classes")
                                           : std::vector<double>(shape.n_r, 0.0);
        pred.anchors.push_back(std::move(p));
    }
    pred.structure = read_structure(document);
    return pred;
}

json to_json(const GridShape& shape, const GridTarget& target) {
    json anchors = json::array();
    for (const auto& t : target.anchors) {
        anchors.push_back({{"is_radical", t.has_radical},
                           {"box", {t.box.x, t.box.y, t.box.w, t.box.h}},
                           {"confidence", t.confidence},
                           {"classes", t.classes}});
    }
    return json{{"shape", {{"K", shape.K}, {"M", shape.M}, {"n_r", shape.n_r}}},
                {"anchors", std::move(anchors)},
                {"structure", target.structure}};
}

json to_json(const LossBreakdown& losses) {
    return json{{"l_r", losses.l_r}, {"l_coo", losses.l_coo}, {"l_isR", losses.l_isR}, {"l_s", losses.l_s},
                {"total", losses.total}};
}

}  // namespace radreason
