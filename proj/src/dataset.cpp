#include "wego/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "wego/errors.hpp"

namespace wego {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    const std::size_t rows = j.size();
    const std::size_t cols = rows == 0 ? 0 : j.at(0).size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (j.at(i).size() != cols)
            throw DataError("ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c)
            m(i, c) = j.at(i).at(c).get<double>();
    }
    return m;
}

json embeddings_to_json(const std::vector<Embedding>& es) {
    json rows = json::array();
    for (const auto& e : es) rows.push_back(e);
    return rows;
}

std::vector<Embedding> embeddings_from_json(const json& j) {
    std::vector<Embedding> es;
    for (const auto& row : j) es.push_back(row.get<Embedding>());
    return es;
}

} // namespace

void write_corpus(const std::vector<StoryPair>& corpus, const std::string& path) {
    std::ofstream os(path);
    if (!os)
        throw DataError("cannot open dataset for writing: " + path);
    for (const auto& story : corpus) {
        json j;
        j["id"] = story.id;
        j["text_embeddings"] = embeddings_to_json(story.text.elements);
        j["image_embeddings"] = embeddings_to_json(story.image.elements);
        j["gold_text_order"] = story.text.gold_order;
        j["gold_image_order"] = story.image.gold_order;
        if (story.cross_sim)
            j["cross_sim"] = matrix_to_json(*story.cross_sim);
        os << j.dump() << '\n';
    }
    if (!os)
        throw DataError("dataset write failed: " + path);
}

std::vector<StoryPair> read_corpus(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw DataError("cannot open dataset: " + path);
    std::vector<StoryPair> corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        try {
            StoryPair story;
            story.id = j.value("id", "line-" + std::to_string(lineno));
            story.text.modality = Modality::Text;
            story.image.modality = Modality::Image;
            story.text.elements = embeddings_from_json(j.at("text_embeddings"));
            story.image.elements = embeddings_from_json(j.at("image_embeddings"));
            story.text.gold_order = j.at("gold_text_order").get<std::vector<int>>();
            story.image.gold_order = j.at("gold_image_order").get<std::vector<int>>();
            if (j.contains("cross_sim"))
                story.cross_sim = matrix_from_json(j.at("cross_sim"));
            const auto violations = validate_story(story);
            if (!violations.empty())
                throw DataError("story '" + story.id + "': " + violations.front());
            corpus.push_back(std::move(story));
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return corpus;
}

namespace {

json report_json(const CorpusReport& r) {
    return json{{"acc", r.acc}, {"pmr", r.pmr}, {"tau", r.tau}};
}

} // namespace

std::string report_to_json(const std::vector<StepReport>& reports) {
    json steps = json::array();
    for (std::size_t s = 0; s < reports.size(); ++s)
        steps.push_back(json{{"step", s},
                             {"text", report_json(reports[s].text)},
                             {"image", report_json(reports[s].image)}});
    return json{{"steps", steps}}.dump(2);
}

void write_report(const std::vector<StepReport>& reports, const std::string& path) {
    std::ofstream os(path);
    if (!os)
        throw DataError("cannot open report for writing: " + path);
    os << report_to_json(reports) << '\n';
}

std::string trace_to_json(const std::string& story_id, const InferResult& result) {
    json steps = json::array();
    for (std::size_t s = 0; s < result.trace.size(); ++s) {
        const auto& st = result.trace[s];
        steps.push_back(json{{"step", s},
                             {"text_scores", matrix_to_json(st.text_scores)},
                             {"image_scores", matrix_to_json(st.image_scores)},
                             {"text_perm", st.text_perm.order},
                             {"image_perm", st.image_perm.order}});
    }
    return json{{"id", story_id}, {"steps", steps}}.dump(2);
}

} // namespace wego
