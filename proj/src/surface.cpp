#include "rigidity/surface.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rigidity/errors.hpp"

namespace rigidity {

namespace {

using nlohmann::json;

std::string entity(const char* kind, int i) {
    std::ostringstream os;
    os << kind << " " << i;
    return os.str();
}

Vec3 newell_normal(const std::vector<Vec3>& pts) {
    Vec3 n = Vec3::Zero();
    const size_t m = pts.size();
    for (size_t i = 0; i < m; ++i) {
        const Vec3& p = pts[i];
        const Vec3& q = pts[(i + 1) % m];
        n += p.cross(q);
    }
    return n;
}

double polygon_diameter(const std::vector<Vec3>& pts) {
    double d = 0.0;
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j)
            d = std::max(d, (pts[i] - pts[j]).norm());
    return d;
}

// Signed angle from a to b about axis n (all unit, a,b perpendicular to n).
double signed_angle(const Vec3& a, const Vec3& b, const Vec3& n) {
    return std::atan2(a.cross(b).dot(n), a.dot(b));
}

int require_int(const json& j, const char* what) {
    if (!j.is_number_integer()) throw ParseError(std::string("expected integer for ") + what);
    return j.get<int>();
}

} // namespace

Surface load_surface_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid document: ") + e.what());
    }
    return load_surface(doc);
}

Surface load_surface(const json& doc) {
    Surface s;
    try {
        if (!doc.is_object()) throw ParseError("document root must be an object");
        for (const char* key : {"vertices", "panels", "hinges"})
            if (!doc.contains(key)) throw ParseError(std::string("missing key: ") + key);

        for (const auto& v : doc.at("vertices")) {
            if (!v.is_array() || v.size() != 3) throw ParseError("vertex must be [x, y, z]");
            s.vertices.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
        }
        for (const auto& p : doc.at("panels")) {
            std::vector<int> idx;
            for (const auto& i : p) idx.push_back(require_int(i, "panel vertex"));
            s.panels.push_back(std::move(idx));
        }
        for (const auto& h : doc.at("hinges")) {
            HingeSpec hs;
            hs.panels = {require_int(h.at("panels").at(0), "hinge panel"),
                         require_int(h.at("panels").at(1), "hinge panel")};
            hs.edge = {require_int(h.at("edge").at(0), "hinge edge vertex"),
                       require_int(h.at("edge").at(1), "hinge edge vertex")};
            hs.angle_index = require_int(h.at("angle_index"), "angle_index");
            s.hinges.push_back(hs);
        }
        if (doc.contains("interior_vertices")) {
            for (const auto& iv : doc.at("interior_vertices")) {
                InteriorVertexSpec spec;
                spec.vertex = require_int(iv.at("vertex"), "interior vertex");
                for (const auto& step : iv.at("fan")) {
                    if (!step.is_array() || step.size() != 2)
                        throw ParseError("fan step must be [panel, hinge]");
                    spec.fan.push_back({require_int(step[0], "fan panel"),
                                        require_int(step[1], "fan hinge")});
                }
                s.interior_vertices.push_back(std::move(spec));
            }
        }
        if (doc.contains("cycles")) {
            for (const auto& c : doc.at("cycles")) {
                CycleSpec spec;
                for (const auto& step : c.at("steps")) {
                    CycleStep cs;
                    cs.panel = require_int(step.at("panel"), "cycle panel");
                    cs.hinge = require_int(step.at("hinge"), "cycle hinge");
                    cs.anchor_vertex = require_int(step.at("anchor_vertex"), "cycle anchor");
                    spec.steps.push_back(cs);
                }
                s.cycles.push_back(std::move(spec));
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid document: ") + e.what());
    }

    const int nv = static_cast<int>(s.vertices.size());
    const int np = static_cast<int>(s.panels.size());
    const int nh = static_cast<int>(s.hinges.size());
    if (nv == 0 || np == 0) throw ParseError("document has no vertices or no panels");

    auto check_vertex = [&](int v, const std::string& where) {
        if (v < 0 || v >= nv) throw ParseError("vertex index out of range in " + where);
    };
    auto check_panel = [&](int p, const std::string& where) {
        if (p < 0 || p >= np) throw ParseError("panel index out of range in " + where);
    };
    auto check_hinge = [&](int h, const std::string& where) {
        if (h < 0 || h >= nh) throw ParseError("hinge index out of range in " + where);
    };

    for (int p = 0; p < np; ++p) {
        if (s.panels[p].size() < 3) throw ParseError(entity("panel", p) + " has fewer than 3 vertices");
        std::set<int> uniq;
        for (int v : s.panels[p]) {
            check_vertex(v, entity("panel", p));
            if (!uniq.insert(v).second)
                throw ValidationError(entity("panel", p) + ": repeated vertex (panel not simple)");
        }
    }

    // angle indices 0-based and dense, one per hinge
    {
        std::vector<int> seen(nh, 0);
        for (int h = 0; h < nh; ++h) {
            const HingeSpec& hs = s.hinges[h];
            check_panel(hs.panels[0], entity("hinge", h));
            check_panel(hs.panels[1], entity("hinge", h));
            check_vertex(hs.edge[0], entity("hinge", h));
            check_vertex(hs.edge[1], entity("hinge", h));
            if (hs.angle_index < 0 || hs.angle_index >= nh || seen[hs.angle_index]++)
                throw ParseError(entity("hinge", h) + ": angle indices must be 0-based and dense");
        }
    }
    s.n_angles = nh;

    // panel planarity and normals
    s.panel_normals.resize(np);
    for (int p = 0; p < np; ++p) {
        std::vector<Vec3> pts;
        for (int v : s.panels[p]) pts.push_back(s.vertices[v]);
        Vec3 n = newell_normal(pts);
        const double diam = polygon_diameter(pts);
        if (n.norm() < 1e-12 * diam * diam)
            throw ValidationError(entity("panel", p) + " is degenerate (zero area)");
        n.normalize();
        Vec3 centroid = Vec3::Zero();
        for (const Vec3& q : pts) centroid += q;
        centroid /= static_cast<double>(pts.size());
        const double tol_planar = 1e-8 * diam;
        for (size_t i = 0; i < pts.size(); ++i)
            if (std::abs((pts[i] - centroid).dot(n)) > tol_planar)
                throw ValidationError(entity("panel", p) + " not planar");
        s.panel_normals[p] = n;
    }

    // hinge edges must be boundary edges of both panels, traversed in
    // opposite directions (consistent global orientation)
    auto edge_direction_in_panel = [&](int p, int v1, int v2) -> int {
        const auto& poly = s.panels[p];
        const int m = static_cast<int>(poly.size());
        for (int i = 0; i < m; ++i) {
            if (poly[i] == v1 && poly[(i + 1) % m] == v2) return +1;
            if (poly[i] == v2 && poly[(i + 1) % m] == v1) return -1;
        }
        return 0;
    };
    for (int h = 0; h < nh; ++h) {
        const HingeSpec& hs = s.hinges[h];
        if (hs.edge[0] == hs.edge[1])
            throw ValidationError(entity("hinge", h) + ": degenerate edge");
        const int da = edge_direction_in_panel(hs.panels[0], hs.edge[0], hs.edge[1]);
        const int db = edge_direction_in_panel(hs.panels[1], hs.edge[0], hs.edge[1]);
        if (da == 0 || db == 0)
            throw ValidationError(entity("hinge", h) + ": edge is not shared by its two panels");
        if (da == db)
            throw ValidationError(entity("hinge", h) +
                                  ": panel orientations inconsistent across hinge");
        if ((s.vertices[hs.edge[1]] - s.vertices[hs.edge[0]]).norm() < 1e-12)
            throw ValidationError(entity("hinge", h) + ": zero-length crease");
    }

    // panel connectivity over hinges
    {
        std::vector<int> comp(np, -1);
        std::deque<int> q{0};
        comp[0] = 0;
        while (!q.empty()) {
            int p = q.front();
            q.pop_front();
            for (const HingeSpec& hs : s.hinges) {
                int other = -1;
                if (hs.panels[0] == p) other = hs.panels[1];
                if (hs.panels[1] == p) other = hs.panels[0];
                if (other >= 0 && comp[other] < 0) {
                    comp[other] = 0;
                    q.push_back(other);
                }
            }
        }
        for (int p = 0; p < np; ++p)
            if (comp[p] < 0)
                throw ValidationError(entity("panel", p) + " not connected to panel 0");
    }

    // reference folding angles
    s.rho_ref_ = VecX::Zero(nh);
    {
        FoldingState ref = folding_angles_of_coordinates(s, s.vertices);
        s.rho_ref_ = ref.rho;
    }

    // -------- build loops: interior-vertex fans --------
    for (size_t vi = 0; vi < s.interior_vertices.size(); ++vi) {
        const InteriorVertexSpec& spec = s.interior_vertices[vi];
        check_vertex(spec.vertex, entity("interior vertex", static_cast<int>(vi)));
        if (spec.fan.size() < 3)
            throw ValidationError(entity("interior vertex", static_cast<int>(vi)) +
                                  ": fan needs at least 3 panels");
        Loop loop;
        loop.is_cycle = false;
        loop.vertex = spec.vertex;
        const int n = static_cast<int>(spec.fan.size());
        std::set<int> used_hinges;
        for (int j = 0; j < n; ++j) {
            const FanStep& st = spec.fan[j];
            const FanStep& prev = spec.fan[(j + n - 1) % n];
            check_panel(st.panel, "fan");
            check_hinge(st.hinge, "fan");
            const HingeSpec& hs = s.hinges[st.hinge];
            if (!used_hinges.insert(st.hinge).second)
                throw ValidationError(entity("interior vertex", static_cast<int>(vi)) +
                                      ": fan crosses a hinge twice");
            const bool fwd = hs.panels[0] == prev.panel && hs.panels[1] == st.panel;
            const bool rev = hs.panels[1] == prev.panel && hs.panels[0] == st.panel;
            if (!fwd && !rev)
                throw ValidationError(entity("interior vertex", static_cast<int>(vi)) +
                                      ": fan panels do not close combinatorially at " +
                                      entity("hinge", st.hinge));
            int other;
            if (hs.edge[0] == spec.vertex)
                other = hs.edge[1];
            else if (hs.edge[1] == spec.vertex)
                other = hs.edge[0];
            else
                throw ValidationError(entity("interior vertex", static_cast<int>(vi)) +
                                      ": fan hinge does not touch the vertex");
            LoopStep ls;
            ls.hinge = st.hinge;
            ls.panel = st.panel;
            ls.sigma = (fwd ? 1.0 : -1.0) * (hs.edge[0] == spec.vertex ? 1.0 : -1.0);
            ls.crease_ref = (s.vertices[other] - s.vertices[spec.vertex]).normalized();
            loop.steps.push_back(ls);
        }
        // sector angles, measured about the normal of the panel being left
        for (int j = 0; j < n; ++j) {
            const LoopStep& cur = loop.steps[j];
            const LoopStep& prv = loop.steps[(j + n - 1) % n];
            const Vec3& npanel = s.panel_normals[prv.panel];
            const double a = signed_angle(prv.crease_ref, cur.crease_ref, npanel);
            if (!(a > 1e-12 && a < M_PI - 1e-12))
                throw ValidationError(entity("interior vertex", static_cast<int>(vi)) +
                                      ": sector angle not in (0, pi) at " +
                                      entity("hinge", cur.hinge));
            loop.steps[j].alpha = a;
        }
        // starting frame: x along the last step's crease, z along its panel normal
        {
            const LoopStep& last = loop.steps.back();
            const Vec3 x = last.crease_ref;
            const Vec3 z = s.panel_normals[last.panel];
            const Vec3 y = z.cross(x);
            Mat3 R;
            R.col(0) = x;
            R.col(1) = y;
            R.col(2) = z;
            loop.frame0_ref = make_pose(R, s.vertices[spec.vertex]);
        }
        s.loops.push_back(std::move(loop));
    }

    // -------- build loops: representative cycles --------
    for (size_t ci = 0; ci < s.cycles.size(); ++ci) {
        const CycleSpec& spec = s.cycles[ci];
        if (spec.steps.empty())
            throw ValidationError(entity("cycle", static_cast<int>(ci)) + ": no steps");
        const int n = static_cast<int>(spec.steps.size());
        Loop loop;
        loop.is_cycle = true;

        auto frame_of = [&](const CycleStep& st) -> Mat4 {
            const HingeSpec& hs = s.hinges[st.hinge];
            int other;
            if (hs.edge[0] == st.anchor_vertex)
                other = hs.edge[1];
            else if (hs.edge[1] == st.anchor_vertex)
                other = hs.edge[0];
            else
                throw ValidationError(entity("cycle", static_cast<int>(ci)) +
                                      ": anchor vertex not on the hinge edge");
            const Vec3 x = (s.vertices[other] - s.vertices[st.anchor_vertex]).normalized();
            const Vec3 z = s.panel_normals[st.panel];
            const Vec3 y = z.cross(x);
            Mat3 R;
            R.col(0) = x;
            R.col(1) = y;
            R.col(2) = z;
            return make_pose(R, s.vertices[st.anchor_vertex]);
        };

        std::set<int> used_hinges;
        for (int j = 0; j < n; ++j) {
            const CycleStep& st = spec.steps[j];
            const CycleStep& prev = spec.steps[(j + n - 1) % n];
            check_panel(st.panel, "cycle");
            check_hinge(st.hinge, "cycle");
            check_vertex(st.anchor_vertex, "cycle");
            const HingeSpec& hs = s.hinges[st.hinge];
            if (!used_hinges.insert(st.hinge).second)
                throw ValidationError(entity("cycle", static_cast<int>(ci)) +
                                      ": cycle crosses a hinge twice (unsupported)");
            const bool fwd = hs.panels[0] == prev.panel && hs.panels[1] == st.panel;
            const bool rev = hs.panels[1] == prev.panel && hs.panels[0] == st.panel;
            if (!fwd && !rev)
                throw ValidationError(entity("cycle", static_cast<int>(ci)) +
                                      ": panel sequence not closed at " + entity("hinge", st.hinge));

            const Mat4 Fp = frame_of(prev);
            const Mat4 Fc = frame_of(st);
            const Mat4 Delta = pose_inverse(Fp) * Fc;
            const Vec3 t = Delta.topRightCorner<3, 1>();
            const double scale = std::max(1.0, t.norm());
            if (std::abs(t.z()) > 1e-8 * scale)
                throw ValidationError(entity("cycle", static_cast<int>(ci)) +
                                      ": anchor leaves the previous panel plane at " +
                                      entity("hinge", st.hinge));

            LoopStep ls;
            ls.hinge = st.hinge;
            ls.panel = st.panel;
            int other = hs.edge[0] == st.anchor_vertex ? hs.edge[1] : hs.edge[0];
            ls.crease_ref = (s.vertices[other] - s.vertices[st.anchor_vertex]).normalized();
            ls.anchor_ref = s.vertices[st.anchor_vertex];
            ls.sigma = (fwd ? 1.0 : -1.0) * (hs.edge[0] == st.anchor_vertex ? 1.0 : -1.0);
            ls.length = std::hypot(t.x(), t.y());
            ls.gamma = std::atan2(t.y(), t.x());
            const Mat3 Dr = Delta.topLeftCorner<3, 3>();
            ls.alpha = std::atan2(Dr(1, 0), Dr(0, 0)); // beta
            // the remaining factor must be a rotation about x by the stored angle
            const Mat3 residual_rot =
                rot_z(-ls.alpha) * Dr *
                rot_x(-ls.sigma * s.rho_ref_(hs.angle_index));
            if ((residual_rot - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-8)
                throw ValidationError(entity("cycle", static_cast<int>(ci)) +
                                      ": step transform is not translation+Rz+Rx at " +
                                      entity("hinge", st.hinge));
            loop.steps.push_back(ls);
        }
        loop.frame0_ref = frame_of(spec.steps.back());
        s.loops.push_back(std::move(loop));
    }

    return s;
}

FoldingState folding_angles_of_coordinates(const Surface& s, const std::vector<Vec3>& coords) {
    if (coords.size() != s.vertices.size())
        throw ValidationError("coordinate list length does not match vertex count");
    std::vector<Vec3> normals(s.panels.size());
    for (size_t p = 0; p < s.panels.size(); ++p) {
        std::vector<Vec3> pts;
        for (int v : s.panels[p]) pts.push_back(coords[v]);
        Vec3 n = newell_normal(pts);
        if (n.norm() < 1e-14) throw ValidationError(entity("panel", static_cast<int>(p)) + " degenerate in realization");
        normals[p] = n.normalized();
    }
    FoldingState st;
    st.rho = VecX::Zero(s.n_angles);
    for (size_t h = 0; h < s.hinges.size(); ++h) {
        const HingeSpec& hs = s.hinges[h];
        Vec3 u = coords[hs.edge[1]] - coords[hs.edge[0]];
        const double len = u.norm();
        if (len < 1e-12) throw ValidationError(entity("hinge", static_cast<int>(h)) + ": zero-length crease");
        u /= len;
        const Vec3& na = normals[hs.panels[0]];
        const Vec3& nb = normals[hs.panels[1]];
        st.rho(hs.angle_index) = std::atan2(na.cross(nb).dot(u), na.dot(nb));
    }
    return st;
}

FoldingState folding_angles_from_realization(const Surface& s) {
    return folding_angles_of_coordinates(s, s.vertices);
}

std::vector<Mat4> panel_poses(const Surface& s, const FoldingState& st, int root_panel) {
    const int np = static_cast<int>(s.panels.size());
    if (root_panel < 0 || root_panel >= np) throw std::invalid_argument("root panel out of range");
    if (st.rho.size() != s.n_angles)
        throw ValidationError("folding state length does not match number of hinges");
    std::vector<Mat4> M(np, Mat4::Identity());
    std::vector<char> done(np, 0);
    done[root_panel] = 1;
    std::deque<int> q{root_panel};
    const VecX& ref = s.reference_angles();
    while (!q.empty()) {
        const int p = q.front();
        q.pop_front();
        for (const HingeSpec& hs : s.hinges) {
            int other = -1;
            double sign = 0.0;
            if (hs.panels[0] == p) {
                other = hs.panels[1];
                sign = 1.0; // crossing a -> b rotates by +delta about u
            } else if (hs.panels[1] == p) {
                other = hs.panels[0];
                sign = -1.0;
            } else {
                continue;
            }
            if (done[other]) continue;
            const double delta = st.rho(hs.angle_index) - ref(hs.angle_index);
            const Vec3 base = s.vertices[hs.edge[0]];
            const Vec3 u = (s.vertices[hs.edge[1]] - s.vertices[hs.edge[0]]).normalized();
            M[other] = M[p] * rot_about_line(base, u, sign * delta);
            done[other] = 1;
            q.push_back(other);
        }
    }
    return M;
}

std::vector<Vec3> realize(const Surface& s, const FoldingState& st, int root_panel) {
    const std::vector<Mat4> M = panel_poses(s, st, root_panel);
    std::vector<int> owner(s.vertices.size(), -1);
    for (size_t p = 0; p < s.panels.size(); ++p)
        for (int v : s.panels[p])
            if (owner[v] < 0) owner[v] = static_cast<int>(p);
    std::vector<Vec3> out(s.vertices.size());
    for (size_t v = 0; v < s.vertices.size(); ++v) {
        if (owner[v] < 0) {
            out[v] = s.vertices[v];
            continue;
        }
        const Mat4& T = M[owner[v]];
        out[v] = T.topLeftCorner<3, 3>() * s.vertices[v] + T.topRightCorner<3, 1>();
    }
    return out;
}

GeometryCache geometry_at(const Surface& s, const FoldingState& st, int root_panel) {
    if (st.rho.size() != s.n_angles)
        throw ValidationError("folding state length does not match number of hinges");
    GeometryCache g;
    g.poses = panel_poses(s, st, root_panel);
    for (const Loop& loop : s.loops) {
        LoopGeometry lg;
        std::vector<double> alphas;
        Mat4 M = loop.frame0_ref;
        for (const LoopStep& ls : loop.steps) {
            Mat4 T1 = Mat4::Identity();
            T1.topLeftCorner<3, 3>() = rot_z(ls.alpha);
            if (loop.is_cycle)
                T1.topRightCorner<3, 1>() =
                    Vec3(ls.length * std::cos(ls.gamma), ls.length * std::sin(ls.gamma), 0.0);
            M = M * T1;
            lg.crease_dirs.push_back(M.topLeftCorner<3, 3>().col(0));
            if (loop.is_cycle) lg.anchors.push_back(M.topRightCorner<3, 1>());
            Mat4 T2 = Mat4::Identity();
            T2.topLeftCorner<3, 3>() = rot_x(ls.sigma * st.rho(s.hinges[ls.hinge].angle_index));
            M = M * T2;
            alphas.push_back(ls.alpha);
        }
        g.per_loop.push_back(std::move(lg));
        g.sector_angles.push_back(std::move(alphas));
    }
    return g;
}

} // namespace rigidity
