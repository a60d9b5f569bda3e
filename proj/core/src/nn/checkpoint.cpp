#include "palseg/nn/checkpoint.hpp"

#include <cstring>

#include <json.hpp>

#include "palseg/common/container.hpp"

namespace palseg::nn {

namespace {

struct FileTensor {
    std::vector<std::int64_t> shape;
    std::uint64_t offset = 0;
    std::int64_t numel = 0;
};

struct ParsedHeader {
    nlohmann::json json;
    std::string dtype;
    std::map<std::string, FileTensor> tensors;
};

ParsedHeader parse_header(const std::string& path, const std::string& header_json) {
    ParsedHeader h;
    h.json = nlohmann::json::parse(header_json);
    PALSEG_CHECK(h.json.value("kind", "") == "checkpoint",
                 path, " is not a checkpoint container");
    h.dtype = h.json.value("dtype", "f32");
    PALSEG_CHECK(h.dtype == "f32" || h.dtype == "f64", "unsupported tensor dtype '",
                 h.dtype, "' in ", path);
    for (const auto& t : h.json.at("tensors")) {
        FileTensor ft;
        ft.shape = t.at("shape").get<std::vector<std::int64_t>>();
        ft.offset = t.at("offset").get<std::uint64_t>();
        ft.numel = 1;
        for (auto d : ft.shape) ft.numel *= d;
        const std::string name = t.at("path").get<std::string>();
        PALSEG_CHECK(h.tensors.emplace(name, ft).second,
                     "duplicate tensor path '", name, "' in ", path);
    }
    return h;
}

template <typename T>
void copy_from_payload(const std::vector<std::uint8_t>& payload, const FileTensor& ft,
                       const std::string& dtype, T* dst) {
    if (dtype == "f32") {
        const auto* src = reinterpret_cast<const float*>(payload.data() + ft.offset);
        for (std::int64_t i = 0; i < ft.numel; ++i) dst[i] = static_cast<T>(src[i]);
    } else {
        const auto* src = reinterpret_cast<const double*>(payload.data() + ft.offset);
        for (std::int64_t i = 0; i < ft.numel; ++i) dst[i] = static_cast<T>(src[i]);
    }
}

std::size_t dtype_size(const std::string& dtype) {
    return dtype == "f32" ? sizeof(float) : sizeof(double);
}

CheckpointMeta meta_from_header(const nlohmann::json& header) {
    CheckpointMeta meta;
    meta.config_json = header.at("config").dump();
    meta.epoch = header.value("epoch", 0);
    meta.best_metric = header.value("best_metric", 0.0);
    meta.extra_json = header.contains("extra") ? header.at("extra").dump() : "{}";
    return meta;
}

} // namespace

template <typename T>
void save_checkpoint(const std::string& path, const SegNet<T>& model,
                     const CheckpointMeta& meta) {
    const std::string dtype = sizeof(T) == 4 ? "f32" : "f64";

    nlohmann::json tensors = nlohmann::json::array();
    std::uint64_t offset = 0;
    std::vector<std::pair<const Tensor<T>*, std::uint64_t>> blocks;
    auto append = [&](const std::string& tensor_path, const Tensor<T>& t) {
        tensors.push_back({{"path", tensor_path}, {"shape", t.shape()}, {"offset", offset}});
        blocks.emplace_back(&t, offset);
        offset += static_cast<std::uint64_t>(t.numel()) * sizeof(T);
    };
    for (const auto& p : model.parameters()) append(p.path, p.param->value);
    for (const auto& b : model.buffers()) append(b.path, *b.buffer);

    nlohmann::json header = {
        {"kind", "checkpoint"},
        {"dtype", dtype},
        {"config", nlohmann::json::parse(model_config_to_json_text(model.config()))},
        {"config_fnv1a", model_config_hash(model.config())},
        {"epoch", meta.epoch},
        {"best_metric", meta.best_metric},
        {"extra", nlohmann::json::parse(meta.extra_json.empty() ? "{}" : meta.extra_json)},
        {"tensors", tensors},
    };

    std::vector<std::uint8_t> payload(offset);
    for (const auto& [tensor, off] : blocks) {
        std::memcpy(payload.data() + off, tensor->data(),
                    static_cast<std::size_t>(tensor->numel()) * sizeof(T));
    }
    write_blob_file(path, header.dump(), payload.data(), payload.size());
}

template <typename T>
CheckpointMeta load_checkpoint(const std::string& path, SegNet<T>& model,
                               bool allow_config_mismatch) {
    const BlobFile blob = read_blob_file(path);
    ParsedHeader header = parse_header(path, blob.header_json);

    const std::string file_hash = header.json.value("config_fnv1a", "");
    const std::string model_hash = model_config_hash(model.config());
    if (!allow_config_mismatch) {
        PALSEG_CHECK(file_hash == model_hash, "checkpoint ", path,
                     " was saved for a different model config (hash ", file_hash,
                     ", model has ", model_hash, "); pass the override flag to force");
    }

    std::vector<std::string> missing, mismatched;
    auto load_one = [&](const std::string& tensor_path, auto* dst_tensor) {
        auto it = header.tensors.find(tensor_path);
        if (it == header.tensors.end()) {
            missing.push_back(tensor_path);
            return;
        }
        if (it->second.shape != dst_tensor->shape()) {
            mismatched.push_back(tensor_path + ": file " +
                                 Tensor<T>::shape_str(it->second.shape) + " vs model " +
                                 dst_tensor->shape_str());
            return;
        }
        PALSEG_CHECK(it->second.offset + it->second.numel * dtype_size(header.dtype) <=
                         blob.payload.size(),
                     "tensor '", tensor_path, "' overruns the payload in ", path);
        copy_from_payload(blob.payload, it->second, header.dtype, dst_tensor->data());
        header.tensors.erase(it);
    };

    for (const auto& p : model.parameters()) load_one(p.path, &p.param->value);
    for (const auto& b : model.buffers()) load_one(b.path, b.buffer);

    std::ostringstream problems;
    if (!missing.empty()) {
        problems << "missing tensors:";
        for (const auto& m : missing) problems << " " << m;
    }
    if (!mismatched.empty()) {
        problems << (problems.str().empty() ? "" : "; ") << "shape mismatches:";
        for (const auto& m : mismatched) problems << " [" << m << "]";
    }
    if (!header.tensors.empty()) {
        problems << (problems.str().empty() ? "" : "; ") << "unexpected tensors:";
        for (const auto& [name, ft] : header.tensors) problems << " " << name;
    }
    PALSEG_CHECK(problems.str().empty(), "checkpoint ", path,
                 " does not match the model: ", problems.str());

    return meta_from_header(header.json);
}

CheckpointMeta read_checkpoint_meta(const std::string& path) {
    const BlobFile blob = read_blob_file(path);
    const ParsedHeader header = parse_header(path, blob.header_json);
    return meta_from_header(header.json);
}

template <typename T>
void load_pretrained_encoder(SegNet<T>& model, const std::string& path) {
    const BlobFile blob = read_blob_file(path);
    ParsedHeader header = parse_header(path, blob.header_json);

    std::vector<std::string> missing, mismatched;
    auto load_one = [&](const std::string& tensor_path, auto* dst_tensor) {
        if (tensor_path.rfind("encoder.", 0) != 0) return;
        auto it = header.tensors.find(tensor_path);
        if (it == header.tensors.end()) {
            missing.push_back(tensor_path);
            return;
        }
        if (it->second.shape != dst_tensor->shape()) {
            mismatched.push_back(tensor_path + ": file " +
                                 Tensor<T>::shape_str(it->second.shape) + " vs model " +
                                 dst_tensor->shape_str());
            return;
        }
        copy_from_payload(blob.payload, it->second, header.dtype, dst_tensor->data());
    };
    for (const auto& p : model.parameters()) load_one(p.path, &p.param->value);
    for (const auto& b : model.buffers()) load_one(b.path, b.buffer);

    std::ostringstream problems;
    if (!missing.empty()) {
        problems << "missing tensors:";
        for (const auto& m : missing) problems << " " << m;
    }
    if (!mismatched.empty()) {
        problems << (problems.str().empty() ? "" : "; ") << "shape mismatches:";
        for (const auto& m : mismatched) problems << " [" << m << "]";
    }
    PALSEG_CHECK(problems.str().empty(), "pretrained encoder ", path,
                 " does not cover the model encoder: ", problems.str());
}

template void save_checkpoint<float>(const std::string&, const SegNet<float>&,
                                     const CheckpointMeta&);
template void save_checkpoint<double>(const std::string&, const SegNet<double>&,
                                      const CheckpointMeta&);
template CheckpointMeta load_checkpoint<float>(const std::string&, SegNet<float>&, bool);
template CheckpointMeta load_checkpoint<double>(const std::string&, SegNet<double>&, bool);
template void load_pretrained_encoder<float>(SegNet<float>&, const std::string&);
template void load_pretrained_encoder<double>(SegNet<double>&, const std::string&);

} // namespace palseg::nn
