#include "tensorreg/model_io.hpp"

#include "tensorreg/tensor_io.hpp"

#include "json.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace tensorreg {

namespace {

using nlohmann::json;

DenseTensor matrix_block(const Eigen::MatrixXd& m) { return DenseTensor::from_matrix(m); }

Eigen::MatrixXd block_matrix(const DenseTensor& t, const char* name) {
    if (t.order() == 2) return t.to_matrix();
    if (t.order() == 1) return Eigen::Map<const Eigen::MatrixXd>(t.data().data(), static_cast<Eigen::Index>(t.size()), 1);
    throw IoError(std::string("model block ") + name + " is not a matrix");
}

json kernel_json(const KernelSpec& k) {
    const char* kind = k.kind == KernelSpec::Kind::Linear ? "linear" : k.kind == KernelSpec::Kind::Rbf ? "rbf" : "poly";
    return {{"kind", kind}, {"sigma", k.sigma}, {"degree", k.degree}, {"offset", k.offset}};
}

KernelSpec kernel_from_json(const json& j) {
    KernelSpec k;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "linear") k.kind = KernelSpec::Kind::Linear;
    else if (kind == "rbf") k.kind = KernelSpec::Kind::Rbf;
    else if (kind == "poly") k.kind = KernelSpec::Kind::Polynomial;
    else throw IoError("unknown kernel kind '" + kind + "' in model header");
    k.sigma = j.at("sigma").get<double>();
    k.degree = j.at("degree").get<int>();
    k.offset = j.at("offset").get<double>();
    k.validate();
    return k;
}

}  // namespace

void write_model(std::ostream& os, const AnyModel& model) {
    json header;
    std::vector<std::pair<std::string, DenseTensor>> blocks;
    if (const auto* m = std::get_if<HolrrModel>(&model)) {
        header["kind"] = "primal";
        header["gamma"] = m->gamma;
        header["ranks"] = m->ranks;
        header["output_shape"] = m->output_shape();
        header["warnings"] = m->warnings;
        blocks.emplace_back("core", m->factors.core);
        for (std::size_t i = 0; i < m->factors.factors.size(); ++i)
            blocks.emplace_back("U" + std::to_string(i), matrix_block(m->factors.factors[i]));
    } else {
        const auto& k = std::get<KernelHolrrModel>(model);
        header["kind"] = "kernel";
        header["gamma"] = k.gamma;
        header["ranks"] = k.ranks;
        header["output_shape"] = k.output_shape();
        header["warnings"] = k.warnings;
        header["kernel"] = kernel_json(k.kernel);
        blocks.emplace_back("coeff", k.coeff);
        blocks.emplace_back("train_inputs", matrix_block(k.train_inputs));
        blocks.emplace_back("dual_basis", matrix_block(k.dual_basis));
        blocks.emplace_back("eigenvalues", DenseTensor::from_vector(k.eigenvalues));
    }
    json names = json::array();
    for (const auto& b : blocks) names.push_back(b.first);
    header["blocks"] = names;
    os << "HOLRR 1\n" << header.dump() << '\n';
    for (const auto& b : blocks) write_dten(os, b.second);
}

AnyModel read_model(std::istream& is) {
    std::string magic;
    if (!std::getline(is, magic) || magic != "HOLRR 1") throw IoError("not a HOLRR v1 model file");
    std::string line;
    if (!std::getline(is, line)) throw IoError("missing model header");
    json header;
    try {
        header = json::parse(line);
        const auto kind = header.at("kind").get<std::string>();
        const auto names = header.at("blocks").get<std::vector<std::string>>();
        std::vector<DenseTensor> blocks;
        for (const auto& name : names) {
            try {
                blocks.push_back(read_dten(is));
            } catch (const IoError& e) {
                throw IoError("block " + name + ": " + e.what());
            }
        }
        if (kind == "primal") {
            HolrrModel m;
            m.gamma = header.at("gamma").get<double>();
            m.ranks = header.at("ranks").get<Shape>();
            m.warnings = header.at("warnings").get<Warnings>();
            if (blocks.size() < 2 || names[0] != "core") throw IoError("primal model needs core and factor blocks");
            m.factors.core = blocks[0];
            for (std::size_t i = 1; i < blocks.size(); ++i)
                m.factors.factors.push_back(block_matrix(blocks[i], names[i].c_str()));
            if (m.factors.factors.size() != m.factors.core.order())
                throw IoError("factor count does not match core order");
            for (std::size_t i = 0; i < m.factors.factors.size(); ++i)
                if (static_cast<std::size_t>(m.factors.factors[i].cols()) != m.factors.core.dim(i))
                    throw IoError("factor U" + std::to_string(i) + " does not match the core");
            return m;
        }
        if (kind == "kernel") {
            KernelHolrrModel m;
            m.gamma = header.at("gamma").get<double>();
            m.ranks = header.at("ranks").get<Shape>();
            m.warnings = header.at("warnings").get<Warnings>();
            m.kernel = kernel_from_json(header.at("kernel"));
            if (blocks.size() != 4) throw IoError("kernel model needs 4 blocks");
            m.coeff = blocks[0];
            m.train_inputs = block_matrix(blocks[1], "train_inputs");
            m.dual_basis = block_matrix(blocks[2], "dual_basis");
            m.eigenvalues = blocks[3].vec();
            if (m.coeff.dim(0) != static_cast<std::size_t>(m.train_inputs.rows()))
                throw IoError("coefficient tensor does not match the training inputs");
            return m;
        }
        throw IoError("unknown model kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed model header: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const AnyModel& model) {
    atomic_write(path, [&](std::ostream& os) { write_model(os, model); });
}

AnyModel load_model(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    try {
        return read_model(is);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

DenseTensor predict(const AnyModel& model, const Eigen::MatrixXd& x) {
    return std::visit(
        [&](const auto& m) {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, HolrrModel>) return holrr_predict(m, x);
            else return kholrr_predict(m, x);
        },
        model);
}

std::size_t model_input_dim(const AnyModel& model) {
    if (const auto* m = std::get_if<HolrrModel>(&model)) return m->input_dim();
    return static_cast<std::size_t>(std::get<KernelHolrrModel>(model).train_inputs.cols());
}

}  // namespace tensorreg
