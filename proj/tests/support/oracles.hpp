#pragma once

// Independent reference code for tests: random instance generators and naive
// evaluators that share no logic with the library beyond its data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radreason/ckg.hpp"
#include "radreason/softlabel.hpp"

namespace testing_support {

using namespace radreason;

inline std::string fixture(const std::string& name) { return std::string(RADREASON_FIXTURES) + "/" + name; }

inline CkgDocument three_char_document() {
    CkgDocument doc;
    doc.radicals = {{RadicalId("r1"), {}}, {RadicalId("r2"), {}}, {RadicalId("r3"), {}}};
    doc.structures = {{StructureId("s1"), {}, 2}, {StructureId("s2"), {}, 2}};
    doc.characters = {
        {CharId("A"), {RadicalId("r1"), RadicalId("r2")}, StructureId("s1"), {}},
        {CharId("B"), {RadicalId("r1"), RadicalId("r2")}, StructureId("s2"), {}},
        {CharId("C"), {RadicalId("r1"), RadicalId("r3")}, StructureId("s1"), {}},
    };
    return doc;
}

inline Ckg three_char_graph() { return Ckg::build(three_char_document()); }

inline RadicalDetection detection(std::vector<std::pair<std::string, double>> cats) {
    RadicalDetection d;
    for (auto& [id, p] : cats) d.categories.push_back({RadicalId(id), p});
    canonicalize(d);
    return d;
}

inline StructurePrediction structures(std::vector<std::pair<std::string, double>> entries) {
    StructurePrediction sp;
    for (auto& [id, p] : entries) sp.entries.push_back({StructureId(id), p});
    canonicalize(sp);
    return sp;
}

struct Instance {
    CkgDocument doc;
    PredictionSet preds;
};

// Probabilities come from a coarse grid half the time so ties are common.
inline double random_p(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < 0.5) return std::round(u(rng) * 10.0) / 10.0;
    return u(rng);
}

inline Instance random_instance(std::mt19937_64& rng, int max_detections = 4, int max_radicals = 10,
                                int max_structures = 4) {
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    Instance inst;
    const int n_r = uni(1, max_radicals);
    const int n_s = uni(1, max_structures);
    for (int r = 0; r < n_r; ++r) inst.doc.radicals.push_back({RadicalId("r" + std::to_string(r)), {}});
    for (int s = 0; s < n_s; ++s) inst.doc.structures.push_back({StructureId("s" + std::to_string(s)), {}, {}});
    const int n_c = uni(1, 25);
    for (int c = 0; c < n_c; ++c) {
        CharacterEntry e;
        e.id = CharId("c" + std::to_string(c));
        const int len = uni(1, max_detections);
        for (int k = 0; k < len; ++k) e.radicals.push_back(inst.doc.radicals[uni(0, n_r - 1)].id);
        e.structure = inst.doc.structures[uni(0, n_s - 1)].id;
        inst.doc.characters.push_back(std::move(e));
    }
    // Bias detections towards an existing character so matches actually occur.
    const auto& seed_char = inst.doc.characters[uni(0, n_c - 1)];
    const int num = uni(1, max_detections);
    for (int d = 0; d < num; ++d) {
        RadicalDetection det;
        std::vector<int> ids(n_r);
        for (int r = 0; r < n_r; ++r) ids[r] = r;
        std::shuffle(ids.begin(), ids.end(), rng);
        const int k = uni(1, n_r);
        for (int i = 0; i < k; ++i) det.categories.push_back({inst.doc.radicals[ids[i]].id, random_p(rng)});
        if (d < static_cast<int>(seed_char.radicals.size())) {
            const auto& want = seed_char.radicals[d];
            if (std::none_of(det.categories.begin(), det.categories.end(), [&](auto& c) { return c.id == want; })) {
                det.categories.push_back({want, random_p(rng)});
            }
        }
        canonicalize(det);
        inst.preds.detections.push_back(std::move(det));
    }
    std::vector<int> sids(n_s);
    for (int s = 0; s < n_s; ++s) sids[s] = s;
    std::shuffle(sids.begin(), sids.end(), rng);
    const int ks = uni(1, n_s);
    for (int i = 0; i < ks; ++i) inst.preds.structure.entries.push_back({inst.doc.structures[sids[i]].id, random_p(rng)});
    canonicalize(inst.preds.structure);
    return inst;
}

struct NaiveMapping {
    std::vector<std::uint32_t> ranks;
    double conf = 0.0;
};

// Full Cartesian product of the top-k lists by odometer, then one global sort.
inline std::vector<NaiveMapping> naive_mappings(const std::vector<RadicalDetection>& dets, std::size_t top_k) {
    std::vector<std::uint32_t> sizes;
    for (const auto& d : dets) sizes.push_back(static_cast<std::uint32_t>(std::min(top_k, d.categories.size())));
    std::vector<NaiveMapping> out;
    std::vector<std::uint32_t> odo(dets.size(), 0);
    while (true) {
        NaiveMapping m;
        m.ranks = odo;
        double sum = 0.0;
        for (std::size_t d = 0; d < dets.size(); ++d) sum += dets[d].categories[odo[d]].p;
        m.conf = sum / static_cast<double>(dets.size());
        out.push_back(std::move(m));
        bool done = true;
        for (std::size_t i = dets.size(); i-- > 0;) {
            if (++odo[i] < sizes[i]) {
                done = false;
                break;
            }
            odo[i] = 0;
        }
        if (done) break;
    }
    std::stable_sort(out.begin(), out.end(), [](const NaiveMapping& a, const NaiveMapping& b) {
        if (a.conf != b.conf) return a.conf > b.conf;
        return a.ranks < b.ranks;
    });
    return out;
}

// ---- naive loss evaluator, reading grid documents directly ----

struct NaiveLosses {
    double l_r = 0, l_coo = 0, l_isR = 0, l_s = 0, total = 0;
};

inline double clamp_log(double v) { return std::log(v < 1e-7 ? 1e-7 : v); }

inline NaiveLosses naive_losses(const nlohmann::json& target, const nlohmann::json& pred, double lambda,
                                double lambda_s) {
    NaiveLosses out;
    const int K = target["shape"]["K"], M = target["shape"]["M"], n_r = target["shape"]["n_r"];
    for (int i = 0; i < K * K; ++i) {
        for (int j = 0; j < M; ++j) {
            const auto& t = target["anchors"][i * M + j];
            const auto& p = pred["anchors"][i * M + j];
            const bool is_r = t["is_radical"];
            const double c = t["confidence"], c_hat = p["confidence"];
            if (is_r) {
                out.l_isR += (c - c_hat) * (c - c_hat);
                for (int k = 0; k < n_r; ++k) {
                    const double q = t["classes"][k], q_hat = p["classes"][k];
                    double term = 0;
                    if (q != 0) term += q * clamp_log(q_hat);
                    if (q != 1) term += (1 - q) * clamp_log(1 - q_hat);
                    out.l_r -= term;
                }
                const double x = t["box"][0], y = t["box"][1], w = t["box"][2], h = t["box"][3];
                const double xh = p["box"][0], yh = p["box"][1], wh = p["box"][2], hh = p["box"][3];
                out.l_coo += (2 - w * h) * ((x - xh) * (x - xh) + (y - yh) * (y - yh)) +
                             (2 - w * h) * ((w - wh) * (w - wh) + (h - hh) * (h - hh));
            } else {
                out.l_isR += lambda * (c - c_hat) * (c - c_hat);
            }
        }
    }
    const auto& q = target["structure"];
    const auto& qh = pred["structure"];
    double s = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double qi = q[i];
        if (qi != 0) s += qi * clamp_log(qh[i].get<double>());
    }
    out.l_s = q.empty() ? 0.0 : -lambda_s / static_cast<double>(q.size()) * s;
    out.total = out.l_r + out.l_coo + out.l_isR + out.l_s;
    return out;
}

// Random grid pair; prediction probabilities stay inside [lo, 1 - lo] so the
// losses are differentiable there.
inline std::pair<nlohmann::json, nlohmann::json> random_grid_pair(std::mt19937_64& rng, int max_k = 4,
                                                                  double lo = 0.05) {
    auto uni = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
    std::uniform_real_distribution<double> u(0.0, 1.0), inner(lo, 1.0 - lo);
    const int K = uni(1, max_k), M = uni(1, 3), n_r = uni(1, 4), n_s = uni(1, 5);
    nlohmann::json shape = {{"K", K}, {"M", M}, {"n_r", n_r}};
    nlohmann::json t_anchors = nlohmann::json::array(), p_anchors = nlohmann::json::array();
    for (int a = 0; a < K * K * M; ++a) {
        const bool is_r = u(rng) < 0.4;
        nlohmann::json tc = nlohmann::json::array(), pc = nlohmann::json::array();
        const int hot = uni(0, n_r - 1);
        for (int k = 0; k < n_r; ++k) {
            tc.push_back(u(rng) < 0.3 ? u(rng) : (k == hot ? 1.0 : 0.0));
            pc.push_back(inner(rng));
        }
        t_anchors.push_back({{"is_radical", is_r},
                             {"box", {u(rng), u(rng), u(rng), u(rng)}},
                             {"confidence", is_r ? 1.0 : 0.0},
                             {"classes", tc}});
        p_anchors.push_back({{"box", {u(rng), u(rng), u(rng), u(rng)}}, {"confidence", u(rng)}, {"classes", pc}});
    }
    nlohmann::json q = nlohmann::json::array(), qh = nlohmann::json::array();
    const int hot = uni(0, n_s - 1);
    double total = 0;
    std::vector<double> raw(n_s);
    for (int i = 0; i < n_s; ++i) total += raw[i] = inner(rng);
    for (int i = 0; i < n_s; ++i) {
        q.push_back(i == hot ? 1.0 : 0.0);
        qh.push_back(raw[i] / total);
    }
    return {{{"shape", shape}, {"anchors", t_anchors}, {"structure", q}},
            {{"shape", shape}, {"anchors", p_anchors}, {"structure", qh}}};
}

}  // namespace testing_support
