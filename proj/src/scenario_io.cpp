#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "degsweep/cli.hpp"

namespace degsweep::cli {

namespace {

using json = nlohmann::json;

// Reader over one JSON object that records consumed keys so leftovers can be
// rejected.
class Fields {
public:
    Fields(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("scenario " + (path_.empty() ? std::string("/") : path_) + ": " + what);
    }

    [[nodiscard]] std::string child(const std::string& key) const { return path_ + "/" + key; }

    void mark(const std::string& key) { seen_.insert(key); }

    bool has(const std::string& key) const { return node_.contains(key) && !node_.at(key).is_null(); }

    const json& at(const std::string& key) {
        seen_.insert(key);
        if (!node_.contains(key)) {
            throw ParseError("scenario " + child(key) + ": missing required field");
        }
        return node_.at(key);
    }

    double number(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number()) throw ParseError("scenario " + child(key) + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ParseError("scenario " + child(key) + ": expected a finite number");
        return d;
    }

    double number(const std::string& key, double fallback) {
        seen_.insert(key);
        return has(key) ? number(key) : fallback;
    }

    /// Number, or the string "inf", or absent/null meaning infinity.
    double extended(const std::string& key) {
        seen_.insert(key);
        if (!has(key)) return kInf;
        const json& v = node_.at(key);
        if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) return kInf;
        return number(key);
    }

    long integer(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number_integer()) throw ParseError("scenario " + child(key) + ": expected an integer");
        return v.get<long>();
    }

    std::string string(const std::string& key) {
        const json& v = at(key);
        if (!v.is_string()) throw ParseError("scenario " + child(key) + ": expected a string");
        return v.get<std::string>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        seen_.insert(key);
        return has(key) ? string(key) : fallback;
    }

    Vec vector(const std::string& key, Eigen::Index n) {
        const json& v = at(key);
        return to_vec(v, child(key), n);
    }

    Vec vector_or_empty(const std::string& key, Eigen::Index n) {
        seen_.insert(key);
        return has(key) ? vector(key, n) : Vec();
    }

    static Vec to_vec(const json& v, const std::string& path, Eigen::Index n) {
        if (!v.is_array()) throw ParseError("scenario " + path + ": expected an array of numbers");
        if (n >= 0 && static_cast<Eigen::Index>(v.size()) != n) {
            throw ParseError("scenario " + path + ": expected " + std::to_string(n) + " entries, got " +
                             std::to_string(v.size()));
        }
        Vec out(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ParseError("scenario " + path + "/" + std::to_string(i) + ": expected a number");
            out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
            if (!std::isfinite(out[static_cast<Eigen::Index>(i)])) {
                throw ParseError("scenario " + path + "/" + std::to_string(i) + ": expected a finite number");
            }
        }
        return out;
    }

    void finish() const {
        for (const auto& [key, value] : node_.items()) {
            if (!seen_.count(key)) throw ParseError("scenario " + child(key) + ": unknown key");
        }
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

sets::HalfSpaceSpec parse_half_space(Fields& f, Eigen::Index n) {
    sets::HalfSpaceSpec s;
    s.zeta = f.vector("zeta", n);
    s.rotation_rate = f.number("rotation_rate", 0.0);
    s.zeta_perp = f.vector_or_empty("zeta_perp", n);
    s.beta0 = f.number("beta0", 0.0);
    s.kappa_t = f.number("kappa_t", 0.0);
    s.state_lipschitz = f.number("L_state", 0.0);
    s.u = f.vector_or_empty("u", n);
    return s;
}

sets::BallSpec parse_ball(Fields& f, Eigen::Index n) {
    sets::BallSpec s;
    s.center = f.vector("center", n);
    s.velocity = f.vector_or_empty("velocity", n);
    s.state_gain = f.number("state_gain", 0.0);
    s.radius = f.number("radius");
    return s;
}

sets::BoxSpec parse_box(Fields& f, Eigen::Index n) {
    sets::BoxSpec s;
    s.lower = f.vector("lower", n);
    s.upper = f.vector("upper", n);
    s.lower_velocity = f.vector_or_empty("lower_velocity", n);
    s.upper_velocity = f.vector_or_empty("upper_velocity", n);
    return s;
}

sets::HalfSpaceIntersectionSpec parse_intersection(Fields& f, Eigen::Index n) {
    sets::HalfSpaceIntersectionSpec s;
    const json& members = f.at("members");
    if (!members.is_array() || members.empty()) f.fail("members must be a nonempty array");
    for (std::size_t i = 0; i < members.size(); ++i) {
        Fields m(members[i], f.child("members") + "/" + std::to_string(i));
        if (m.string("type", "half_space") != "half_space") m.fail("intersection members must be half_space");
        s.members.push_back(parse_half_space(m, n));
        m.finish();
    }
    return s;
}

sets::ConvexSpec parse_convex(Fields& f, Eigen::Index n) {
    const std::string type = f.string("type");
    if (type == "half_space") return parse_half_space(f, n);
    if (type == "ball") return parse_ball(f, n);
    if (type == "box") return parse_box(f, n);
    if (type == "half_space_intersection") return parse_intersection(f, n);
    f.fail("unknown convex set type '" + type + "'");
}

sets::MovingSetSpec::Variant parse_set(Fields& f, Eigen::Index n) {
    const std::string type = f.string("type");
    if (type == "wedge2d") {
        if (n != 2) f.fail("wedge2d requires dimension 2");
        sets::Wedge2DSpec w;
        w.apex = f.vector("apex", 2);
        w.velocity = f.vector_or_empty("velocity", 2);
        return w;
    }
    if (type == "union") {
        sets::UnionSpec u;
        const json& members = f.at("members");
        if (!members.is_array() || members.empty()) f.fail("members must be a nonempty array");
        for (std::size_t i = 0; i < members.size(); ++i) {
            Fields m(members[i], f.child("members") + "/" + std::to_string(i));
            u.members.push_back(parse_convex(m, n));
            m.finish();
        }
        return u;
    }
    return std::visit([](auto&& c) -> sets::MovingSetSpec::Variant { return std::move(c); }, parse_convex(f, n));
}

ops::OperatorSpec parse_operator(Fields& f, Eigen::Index n) {
    const std::string type = f.string("type");
    try {
        if (type == "identity") return ops::OperatorSpec::identity(n);
        if (type == "scaled_identity") return ops::OperatorSpec::scaled_identity(n, f.number("gamma"));
        if (type == "linear_spd") {
            const json& rows = f.at("matrix");
            if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n) {
                f.fail("matrix must have " + std::to_string(n) + " rows");
            }
            Mat mat(n, n);
            for (Eigen::Index i = 0; i < n; ++i) {
                mat.row(i) = Fields::to_vec(rows[static_cast<std::size_t>(i)], f.child("matrix") + "/" + std::to_string(i), n)
                                 .transpose();
            }
            std::optional<double> m;
            std::optional<double> M;
            if (f.has("m")) m = f.number("m");
            if (f.has("M")) M = f.number("M");
            return ops::OperatorSpec::linear_spd(std::move(mat), m, M);
        }
    } catch (const InvalidOperator& e) {
        throw ValidationError("H_A1", e.what());
    }
    f.fail("unknown operator type '" + type + "'");
}

dynamics::Method parse_method(Fields& f) {
    const std::string m = f.string("method", "rk4");
    if (m == "euler") return dynamics::Method::euler;
    if (m == "rk4") return dynamics::Method::rk4;
    if (m == "adaptive") return dynamics::Method::adaptive;
    f.fail("unknown integrator method '" + m + "'");
}

}  // namespace

ScenarioDocument parse_scenario(std::string_view text, bool validate, const analysis::Sampler& sampler) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario: syntax error: ") + e.what());
    }
    Fields top(root, "");

    Fields problem(top.at("problem"), "/problem");
    const long dim = problem.integer("dimension");
    if (dim <= 0) problem.fail("dimension must be positive");
    const Eigen::Index n = dim;
    const double horizon = problem.number("horizon");
    Vec x0 = problem.vector("x0", n);
    problem.finish();

    Fields op_fields(top.at("operator"), "/operator");
    ops::OperatorSpec op = parse_operator(op_fields, n);
    op_fields.finish();

    Fields set_fields(top.at("set"), "/set");
    auto set_variant = parse_set(set_fields, n);
    set_fields.finish();
    std::optional<sets::MovingSetSpec> set;
    try {
        set.emplace(std::move(set_variant));
    } catch (const InvalidSetSpec& e) {
        throw ValidationError("set", e.what());
    } catch (const DimensionMismatch& e) {
        throw ValidationError("set", e.what());
    } catch (const NonFiniteValue& e) {
        throw ValidationError("set", e.what());
    }

    std::vector<double> lambdas;
    {
        const json& arr = top.at("lambdas");
        if (!arr.is_array()) throw ParseError("scenario /lambdas: expected an array of numbers");
        const Vec v = Fields::to_vec(arr, "/lambdas", -1);
        lambdas.assign(v.data(), v.data() + v.size());
    }

    dynamics::IntegratorConfig integrator;
    if (top.has("integrator")) {
        Fields f(top.at("integrator"), "/integrator");
        integrator.method = parse_method(f);
        integrator.safety = f.number("safety", integrator.safety);
        integrator.h_max = f.number("h_max", integrator.h_max);
        integrator.tol_adapt = f.number("tol_adapt", integrator.tol_adapt);
        integrator.h_over_lambda = f.number("h_over_lambda", 0.0);
        f.finish();
    } else {
        top.mark("integrator");
    }

    double alpha = 1.0;
    double rho = kInf;
    if (top.has("assumed")) {
        Fields f(top.at("assumed"), "/assumed");
        alpha = f.number("alpha", 1.0);
        rho = f.extended("rho");
        f.finish();
    } else {
        top.mark("assumed");
    }

    OutputSection output;
    if (top.has("output")) {
        Fields f(top.at("output"), "/output");
        output.dir = f.string("dir", output.dir);
        if (f.has("grid_points")) {
            const long g = f.integer("grid_points");
            if (g < 2) f.fail("grid_points must be >= 2");
            output.grid_points = static_cast<std::size_t>(g);
        } else {
            f.mark("grid_points");
        }
        f.finish();
    } else {
        top.mark("output");
    }
    top.finish();

    ScenarioDocument doc{
        dynamics::Scenario{
            .horizon = horizon,
            .x0 = std::move(x0),
            .op = std::move(op),
            .set = std::move(*set),
            .lambdas = std::move(lambdas),
            .integrator = integrator,
            .alpha_assumed = alpha,
            .rho_assumed = rho,
        },
        output,
        fnv1a64(text),
    };
    if (validate) (void)analysis::validate_scenario(doc.scenario, sampler);
    return doc;
}

ScenarioDocument load_scenario(const std::filesystem::path& path, bool validate, const analysis::Sampler& sampler) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), validate, sampler);
}

}  // namespace degsweep::cli
