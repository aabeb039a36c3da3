#include "cqms/serialize.hpp"

#include <cstdio>
#include <fstream>

namespace cqms::io {

json matrix_to_json(const CMatrix& a) {
    json j;
    j["rows"] = a.rows();
    j["cols"] = a.cols();
    std::vector<double> re, im;
    re.reserve(a.size());
    im.reserve(a.size());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            re.push_back(a(r, c).real());
            im.push_back(a(r, c).imag());
        }
    }
    j["re"] = re;
    j["im"] = im;
    return j;
}

CMatrix matrix_from_json(const json& j) {
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (rows <= 0 || cols <= 0 || static_cast<Eigen::Index>(re.size()) != rows * cols ||
        static_cast<Eigen::Index>(im.size()) != rows * cols) {
        throw input_error("matrix_from_json: inconsistent shape");
    }
    CMatrix a(rows, cols);
    Eigen::Index t = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c, ++t) {
            a(r, c) = Complex(re[t].get<double>(), im[t].get<double>());
        }
    }
    require_finite(a, "matrix_from_json");
    return a;
}

json vector_to_json(const CVector& v) {
    json j;
    std::vector<double> re, im;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        re.push_back(v(i).real());
        im.push_back(v(i).imag());
    }
    j["re"] = re;
    j["im"] = im;
    return j;
}

CVector vector_from_json(const json& j) {
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (re.size() != im.size()) throw input_error("vector_from_json: size mismatch");
    CVector v(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) {
        v(i) = Complex(re[i].get<double>(), im[i].get<double>());
    }
    return v;
}

json system_to_json(const opsys::OperatorSystem& sys) {
    json j;
    j["ambient_dim"] = sys.ambient_dim();
    json basis = json::array();
    for (const CMatrix& b : sys.basis()) basis.push_back(matrix_to_json(b));
    j["basis"] = basis;
    return j;
}

opsys::SystemPtr system_from_json(const json& j) {
    std::vector<CMatrix> basis;
    for (const auto& b : j.at("basis")) basis.push_back(matrix_from_json(b));
    auto sys = std::make_shared<opsys::OperatorSystem>(std::move(basis));
    if (j.contains("ambient_dim") &&
        j.at("ambient_dim").get<Eigen::Index>() != sys->ambient_dim()) {
        throw input_error("system_from_json: ambient_dim disagrees with the basis");
    }
    return sys;
}

json cpmap_to_json(const opsys::CpMap& phi) {
    json j;
    j["n"] = phi.n;
    json images = json::array();
    for (const CMatrix& im : phi.images) images.push_back(matrix_to_json(im));
    j["images"] = images;
    return j;
}

opsys::UcpMap ucp_from_json(const json& j, opsys::SystemPtr system) {
    opsys::UcpMap phi;
    phi.system = std::move(system);
    phi.n = j.at("n").get<Eigen::Index>();
    for (const auto& im : j.at("images")) phi.images.push_back(matrix_from_json(im));
    if (static_cast<Eigen::Index>(phi.images.size()) != phi.system->dim()) {
        throw input_error("ucp_from_json: image count mismatch");
    }
    return phi;
}

namespace {

json automorphism_to_json(const lip::Automorphism& g) {
    json j;
    switch (g.kind) {
        case lip::Automorphism::Kind::unitary_conjugation: j["kind"] = "unitary"; break;
        case lip::Automorphism::Kind::ambient_linear: j["kind"] = "ambient_linear"; break;
        case lip::Automorphism::Kind::coefficient: j["kind"] = "coefficient"; break;
    }
    j["matrix"] = matrix_to_json(g.matrix);
    return j;
}

lip::Automorphism automorphism_from_json(const json& j) {
    lip::Automorphism g;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "unitary") {
        g.kind = lip::Automorphism::Kind::unitary_conjugation;
    } else if (kind == "ambient_linear") {
        g.kind = lip::Automorphism::Kind::ambient_linear;
    } else if (kind == "coefficient") {
        g.kind = lip::Automorphism::Kind::coefficient;
    } else {
        throw input_error("automorphism_from_json: unknown kind " + kind);
    }
    g.matrix = matrix_from_json(j.at("matrix"));
    return g;
}

json maps_to_json(const std::vector<std::vector<CMatrix>>& maps) {
    json out = json::array();
    for (const auto& images : maps) {
        json one = json::array();
        for (const CMatrix& m : images) one.push_back(matrix_to_json(m));
        out.push_back(one);
    }
    return out;
}

std::vector<std::vector<CMatrix>> maps_from_json(const json& j) {
    std::vector<std::vector<CMatrix>> maps;
    for (const auto& one : j) {
        std::vector<CMatrix> images;
        for (const auto& m : one) images.push_back(matrix_from_json(m));
        maps.push_back(std::move(images));
    }
    return maps;
}

} // namespace

json lipnorm_to_json(const lip::LipNorm& l) {
    json j;
    j["system"] = system_to_json(*l.system());
    if (const auto* a = std::get_if<lip::ActionLip>(&l.variant())) {
        j["variant"] = "action";
        json autos = json::array();
        for (const auto& g : a->automorphisms) autos.push_back(automorphism_to_json(g));
        j["automorphisms"] = autos;
        j["lengths"] = a->lengths;
        return j;
    }
    if (const auto* f = std::get_if<lip::FunctionalLip>(&l.variant())) {
        j["variant"] = "functional";
        j["maps"] = maps_to_json(f->maps);
        return j;
    }
    if (const auto* q = std::get_if<lip::QuotientLip>(&l.variant())) {
        j["variant"] = "quotient";
        j["parent"] = lipnorm_to_json(*q->parent);
        j["map"] = matrix_to_json(q->phi);
        return j;
    }
    if (const auto* s = std::get_if<lip::ScaledLip>(&l.variant())) {
        j["variant"] = "scaled";
        j["inner"] = lipnorm_to_json(*s->inner);
        j["factor"] = s->factor;
        return j;
    }
    const auto& d = std::get<lip::DirectSumLip>(l.variant());
    j["variant"] = "direct_sum";
    j["left"] = lipnorm_to_json(*d.left);
    j["right"] = lipnorm_to_json(*d.right);
    j["bridge"] = bridge_to_json(d.bridge);
    return j;
}

lip::LipNormPtr lipnorm_from_json(const json& j) {
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "action") {
        auto sys = system_from_json(j.at("system"));
        std::vector<lip::Automorphism> autos;
        for (const auto& g : j.at("automorphisms")) autos.push_back(automorphism_from_json(g));
        auto lengths = j.at("lengths").get<std::vector<double>>();
        return lip::make_action_lip(std::move(sys), std::move(autos), std::move(lengths));
    }
    if (variant == "functional") {
        auto sys = system_from_json(j.at("system"));
        return lip::make_functional_lip(std::move(sys), maps_from_json(j.at("maps")));
    }
    if (variant == "quotient") {
        auto sys = system_from_json(j.at("system"));
        auto parent = lipnorm_from_json(j.at("parent"));
        return lip::make_quotient_lip(std::move(sys), std::move(parent),
                                      matrix_from_json(j.at("map")));
    }
    if (variant == "scaled") {
        auto inner = lipnorm_from_json(j.at("inner"));
        return lip::make_scaled_lip(std::move(inner), j.at("factor").get<double>());
    }
    if (variant == "direct_sum") {
        auto left = lipnorm_from_json(j.at("left"));
        auto right = lipnorm_from_json(j.at("right"));
        return lip::make_direct_sum_lip(std::move(left), std::move(right),
                                        bridge_from_json(j.at("bridge")));
    }
    throw input_error("lipnorm_from_json: unknown variant " + variant);
}

json bridge_to_json(const metrics::Bridge& b) {
    json j;
    if (const auto* p = std::get_if<metrics::PointBridge>(&b.variant)) {
        j["kind"] = "point";
        j["gamma"] = p->gamma;
        j["sigma0"] = vector_to_json(p->sigma0);
        j["omega0"] = vector_to_json(p->omega0);
    } else if (const auto* nb = std::get_if<metrics::NormBridge>(&b.variant)) {
        j["kind"] = "norm";
        j["eps"] = nb->eps;
    } else if (const auto* qb = std::get_if<metrics::QuotientBridge>(&b.variant)) {
        j["kind"] = "quotient";
        j["eta"] = qb->eta;
        j["map"] = matrix_to_json(qb->phi);
        j["defect_eps"] = qb->defect_eps;
    } else if (const auto* sb = std::get_if<metrics::ScalingBridge>(&b.variant)) {
        j["kind"] = "scaling";
        j["lambda"] = sb->lambda;
        j["C"] = sb->big_c;
    } else {
        const auto& fb = std::get<metrics::FunctionalBridge>(b.variant);
        j["kind"] = "functional";
        j["x_maps"] = maps_to_json(fb.x_maps);
        j["y_maps"] = maps_to_json(fb.y_maps);
    }
    if (b.uniform_bound) j["uniform_bound"] = *b.uniform_bound;
    return j;
}

metrics::Bridge bridge_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "point") {
        return metrics::make_point_bridge(
            j.at("gamma").get<double>(), vector_from_json(j.at("sigma0")),
            vector_from_json(j.at("omega0")),
            j.contains("uniform_bound")
                ? j.at("uniform_bound").get<double>() - j.at("gamma").get<double>()
                : 0.0,
            0.0);
    }
    if (kind == "norm") return metrics::make_norm_bridge(j.at("eps").get<double>());
    if (kind == "quotient") {
        return metrics::make_quotient_bridge(j.at("eta").get<double>(),
                                             matrix_from_json(j.at("map")),
                                             j.at("defect_eps").get<double>());
    }
    if (kind == "scaling") {
        return metrics::make_scaling_bridge(j.at("lambda").get<double>(),
                                            j.at("C").get<double>());
    }
    if (kind == "functional") {
        metrics::FunctionalBridge fb;
        fb.x_maps = maps_from_json(j.at("x_maps"));
        fb.y_maps = maps_from_json(j.at("y_maps"));
        metrics::Bridge b;
        b.variant = std::move(fb);
        return b;
    }
    throw input_error("bridge_from_json: unknown kind " + kind);
}

json estimate_to_json(const metrics::MetricEstimate& e) {
    json j;
    j["value"] = e.value;
    j["kind"] = metrics::MetricEstimate::kind_name(e.kind);
    j["n"] = e.n;
    j["seed"] = e.seed;
    if (!e.params.empty()) {
        json p;
        for (const auto& [k, v] : e.params) p[k] = v;
        j["params"] = p;
    }
    if (!e.witnesses.empty()) {
        json w = json::array();
        for (const auto& wit : e.witnesses) {
            json one;
            one["label"] = wit.label;
            one["recorded_value"] = wit.recorded_value;
            if (wit.element) one["element"] = vector_to_json(*wit.element);
            if (wit.sa_coords) {
                one["sa_coords"] = std::vector<double>(
                    wit.sa_coords->data(), wit.sa_coords->data() + wit.sa_coords->size());
            }
            w.push_back(one);
        }
        j["witnesses"] = w;
    }
    return j;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw input_error("write_csv: cannot open " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << header[i] << (i + 1 < header.size() ? "," : "");
    }
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << row[i] << (i + 1 < row.size() ? "," : "");
        }
        out << "\n";
    }
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("load_json: cannot open " + path.string());
    json j;
    in >> j;
    return j;
}

void save_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw input_error("save_json: cannot open " + path.string());
    out << j.dump(2) << "\n";
}

} // namespace cqms::io
