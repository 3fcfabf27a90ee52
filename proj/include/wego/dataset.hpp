#pragma once

#include <string>
#include <vector>

#include "wego/core_types.hpp"
#include "wego/inference.hpp"

namespace wego {

// Line-delimited JSON, one story per line. Fields: id, text_embeddings,
// image_embeddings, gold_text_order, gold_image_order, cross_sim (optional).
void write_corpus(const std::vector<StoryPair>& corpus, const std::string& path);
std::vector<StoryPair> read_corpus(const std::string& path);

// Per-step metrics report: {"steps": [{"step": t, "text": {...}, "image": {...}}]}
std::string report_to_json(const std::vector<StepReport>& reports);
void write_report(const std::vector<StepReport>& reports, const std::string& path);

// Trace dump for one story: one entry per boost step with matrices and
// decoded permutations.
std::string trace_to_json(const std::string& story_id, const InferResult& result);

} // namespace wego
