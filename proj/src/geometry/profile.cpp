// src/geometry/profile.cpp
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "ariadne/parallel.hpp"
#include "ariadne/vessel_geometry.hpp"

namespace ariadne {
namespace {

std::vector<double> moving_average(const std::vector<double>& v, int window) {
    if (window == 1) return v;
    const int half = window / 2;
    const int n = static_cast<int>(v.size());
    std::vector<double> out(v.size());
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
        double sum = 0.0;
        for (int j = lo; j <= hi; ++j) sum += v[j];
        out[i] = sum / (hi - lo + 1);
    }
    return out;
}

}  // namespace

RadiusProfile build_profile(const CenterlinePath& path, std::vector<double> raw_radius, int smooth_window) {
    if (smooth_window < 1 || smooth_window % 2 == 0) throw ConfigError("smoothing window must be odd and >= 1");
    if (raw_radius.size() != path.size()) throw ShapeError("radius samples do not match path length");
    const std::size_t n = path.size();
    if (n < 3) throw DataError("path has " + std::to_string(n) + " points; profiles need at least 3");

    RadiusProfile p;
    p.path = path;
    p.r = moving_average(raw_radius, smooth_window);
    p.grad.assign(n, 0.0);
    p.curv.assign(n, 0.0);
    const auto& s = path.arc;
    const auto& r = p.r;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h1 = s[i] - s[i - 1], h2 = s[i + 1] - s[i];
        const double denom = h1 * h2 * (h1 + h2);
        p.grad[i] = (h1 * h1 * r[i + 1] - h2 * h2 * r[i - 1] + (h2 * h2 - h1 * h1) * r[i]) / denom;
        p.curv[i] = 2.0 * (h1 * r[i + 1] - (h1 + h2) * r[i] + h2 * r[i - 1]) / denom;
    }
    p.grad[0] = (r[1] - r[0]) / (s[1] - s[0]);
    p.grad[n - 1] = (r[n - 1] - r[n - 2]) / (s[n - 1] - s[n - 2]);
    p.curv[0] = p.curv[1];
    p.curv[n - 1] = p.curv[n - 2];

    p.mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : r) ss += (v - p.mean) * (v - p.mean);
    p.stddev = std::max(std::sqrt(ss / static_cast<double>(n)), kSigmaFloor);
    p.z.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.z[i] = (r[i] - p.mean) / p.stddev;
    return p;
}

RadiusProfile build_profile(const CenterlinePath& path, const DistanceField& field, int smooth_window) {
    std::vector<double> raw;
    raw.reserve(path.size());
    for (const auto& pt : path.points) {
        if (!field.in_bounds(pt.x, pt.y)) throw DataError("path point outside the distance field");
        raw.push_back(field.at(pt.x, pt.y));
    }
    return build_profile(path, std::move(raw), smooth_window);
}

CandidateSet generate_candidates(const RadiusProfile& profile, const CandidateParams& params, int path_id) {
    CandidateSet out;
    out.params = params;
    const double threshold = profile.mean - params.k * profile.stddev;
    std::vector<int> hits;
    for (std::size_t i = 0; i < profile.size(); ++i)
        if (profile.r[i] < threshold && profile.curv[i] > params.theta_curv) hits.push_back(static_cast<int>(i));

    std::stable_sort(hits.begin(), hits.end(), [&](int a, int b) { return profile.r[a] < profile.r[b]; });
    std::vector<int> kept;
    for (int i : hits) {
        const bool near = std::any_of(kept.begin(), kept.end(),
                                      [&](int k) { return std::abs(k - i) <= params.suppression_radius; });
        if (!near) kept.push_back(i);
    }
    std::sort(kept.begin(), kept.end());
    for (int i : kept) out.candidates.push_back({path_id, i, profile.path.points[i]});
    return out;
}

VesselAnalysis analyze_vessels(const BinaryMask& mask, const VesselAnalysisParams& params) {
    VesselAnalysis a;
    a.skeleton = prune_spurs(skeletonize(mask), params.spur_length);
    a.field = distance_transform(mask);
    auto paths = extract_paths(a.skeleton);
    std::erase_if(paths, [&](const CenterlinePath& p) {
        return static_cast<int>(p.size()) < std::max(3, params.min_path_points);
    });

    a.profiles.resize(paths.size());
    std::vector<std::vector<Candidate>> per_path(paths.size());
    parallel::for_each_task(static_cast<std::ptrdiff_t>(paths.size()), [&](std::ptrdiff_t i) {
        a.profiles[i] = build_profile(paths[i], a.field, params.smooth_window);
        per_path[i] = generate_candidates(a.profiles[i], params.candidates, static_cast<int>(i)).candidates;
    });
    for (auto& c : per_path) a.candidates.insert(a.candidates.end(), c.begin(), c.end());
    return a;
}

void write_profile_csv(const RadiusProfile& profile, std::ostream& out) {
    out << "s,x,y,r,grad,curv,z\n";
    const auto old = out.precision(17);
    for (std::size_t i = 0; i < profile.size(); ++i)
        out << profile.path.arc[i] << ',' << profile.path.points[i].x << ',' << profile.path.points[i].y << ','
            << profile.r[i] << ',' << profile.grad[i] << ',' << profile.curv[i] << ',' << profile.z[i] << '\n';
    out.precision(old);
}

}  // namespace ariadne
