#include "datagen/commands.hpp"
#include "datagen/core.hpp"
#include "datagen/errors.hpp"
#include "datagen/metrics.hpp"
#include "datagen/post_processor.hpp"
#include "datagen/tokenize.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace datagen;

namespace {

using Rows = std::vector<std::vector<double>>;

std::vector<std::vector<std::string>> tokenize_all(const std::vector<std::string> &texts) {
    std::vector<std::vector<std::string>> out;
    for (const auto &t : texts)
        out.push_back(tokenize(t));
    return out;
}

std::vector<std::string> row_ids(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i)
        ids.push_back(std::to_string(i));
    return ids;
}

CommonOptions common(std::optional<std::filesystem::path> config, std::vector<std::string> overrides,
                     std::optional<std::filesystem::path> out, bool offline, std::optional<std::uint64_t> seed) {
    CommonOptions o;
    o.config = std::move(config);
    o.overrides = std::move(overrides);
    o.out = std::move(out);
    o.offline = offline;
    o.seed = seed;
    return o;
}

} // namespace

PYBIND11_MODULE(_datagen, m) {
    m.doc() = "Native core of the datagen toolkit";

    py::register_exception<Error>(m, "DatagenError");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<SchemaError>(m, "SchemaError");

    m.def("tokenize", [](const std::string &text) { return tokenize(text); });

    m.def("load_dataset_json", [](const std::filesystem::path &path) {
        auto seed = load_dataset(path);
        return dataset_to_string(seed.items);
    });
    m.def("answer_format", [](const std::filesystem::path &path) {
        return std::string(to_string(load_dataset(path).answer_format));
    });

    m.def("self_bleu", [](const std::vector<std::string> &texts, int max_n) {
        auto toks = tokenize_all(texts);
        return self_bleu(toks, max_n).scores;
    }, py::arg("texts"), py::arg("max_n") = 4);
    m.def("ingf", [](const std::vector<std::string> &texts) { return ingf(tokenize_all(texts)); });
    m.def("remote_clique", [](const Rows &rows) { return remote_clique(EmbeddingMatrix::from_rows(rows)); });
    m.def("aps", [](const Rows &rows) { return aps(EmbeddingMatrix::from_rows(rows)); });

    m.def("distance_matrix", [](const Rows &rows) {
        auto sm = build_similarity_matrix(EmbeddingMatrix::from_rows(rows), row_ids(rows.size()));
        Rows out(rows.size(), std::vector<double>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < rows.size(); ++j)
                out[i][j] = sm.at(i, j);
        return out;
    });
    m.def("group_check", [](const Rows &rows, std::optional<double> theta, std::uint64_t seed) {
        auto ids = row_ids(rows.size());
        auto sm = build_similarity_matrix(EmbeddingMatrix::from_rows(rows), ids);
        std::vector<DatasetItem> items;
        for (const auto &id : ids)
            items.push_back(DatasetItem{id, id, std::nullopt, std::nullopt, {}});
        auto res = group_check(items, sm, theta ? *theta : default_theta(sm), seed);
        return py::make_tuple(res.kept_indices, res.theta);
    }, py::arg("rows"), py::arg("theta") = py::none(), py::arg("seed") = 0);

    m.def("generate", [](std::optional<std::filesystem::path> config, std::vector<std::string> overrides,
                         std::optional<std::filesystem::path> out, bool offline, std::optional<std::uint64_t> seed) {
        py::gil_scoped_release release;
        return cmd_generate(common(config, overrides, out, offline, seed));
    }, py::arg("config") = py::none(), py::arg("overrides") = std::vector<std::string>{}, py::arg("out") = py::none(),
       py::arg("offline") = true, py::arg("seed") = py::none());
    m.def("report_json", [](const std::filesystem::path &run_dir) { return cmd_report(run_dir).dump(); });
}
