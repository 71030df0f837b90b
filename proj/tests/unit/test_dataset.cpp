// Copyright 2026 the qfsru authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "qfsru/dataset.hpp"
#include "qfsru/errors.hpp"
#include "qfsru/fileio.hpp"

using namespace qfsru;
namespace fs = std::filesystem;

namespace {

std::string features(std::size_t n, double v) {
    std::string s = "[";
    for (std::size_t i = 0; i < n; ++i) s += (i ? "," : "") + std::to_string(v + 0.25 * double(i));
    return s + "]";
}

const std::string kHeader = R"({"meta":{"C":3,"d_model":4,"feature_layout":"precomputed"}})";

std::string sample_line(const std::string& id, const std::string& image, int cls,
                        const std::string& extra = "") {
    return R"({"id":")" + id + R"(","image_id":")" + image + R"(","question_tokens":[5,9,2],)" +
           R"("image_features":)" + features(4, 1.0) + R"(,"answer_class":)" + std::to_string(cls) + extra + "}";
}

fs::path temp_dir() {
    auto p = fs::temp_directory_path() / "qfsru-test-dataset";
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("two-line fixture") {
    const auto m = parse_dataset(kHeader + "\n" + sample_line("a", "img1", 0) + "\n\n" +
                                 R"({"id":"b","image_id":"img2","question_features":)" + features(300, -1.0) +
                                 R"(,"image_features":)" + features(4, 2.0) + R"(,"answer_class":2})" + "\n");
    REQUIRE(m.samples.size() == 2);
    CHECK(m.class_count == 3);
    CHECK(m.d_model == 4);
    CHECK(m.samples[0].id == "a");
    CHECK(m.samples[0].question_tokens->size() == kMaxQuestionTokens);
    CHECK((*m.samples[0].question_tokens)[2] == 2);
    CHECK((*m.samples[0].question_tokens)[3] == kPadToken);
    CHECK(m.samples[0].image_features[1] == 1.25);
    CHECK(m.samples[1].question_features->size() == 300);
    CHECK(m.samples[1].answer_class == 2);
}

TEST_CASE("long token lists are truncated to 50") {
    std::string toks = "[";
    for (int i = 1; i <= 60; ++i) toks += (i > 1 ? "," : "") + std::to_string(i);
    toks += "]";
    const auto m = parse_dataset(kHeader + "\n" + R"({"id":"a","image_id":"i","question_tokens":)" + toks +
                                 R"(,"image_features":)" + features(4, 0) + R"(,"answer_class":1})");
    CHECK(m.samples[0].question_tokens->size() == 50);
    CHECK(m.samples[0].question_tokens->back() == 50);
}

TEST_CASE("schema and parse errors") {
    CHECK_THROWS_AS(parse_dataset(""), SchemaError);
    CHECK_THROWS_AS(parse_dataset(kHeader + "\n" + sample_line("a", "i", 3)), SchemaError);
    CHECK_THROWS_AS(parse_dataset(kHeader + "\n{not json"), ParseError);
    CHECK_THROWS_AS(parse_dataset(sample_line("a", "i", 0)), ParseError);
    // Wrong image width for the layout.
    CHECK_THROWS_AS(parse_dataset(R"({"meta":{"C":3,"d_model":8}})" "\n" + sample_line("a", "i", 0)), SchemaError);
    // Neither question encoding.
    CHECK_THROWS_AS(parse_dataset(kHeader + "\n" + R"({"id":"a","image_id":"i","image_features":)" +
                                  features(4, 0) + R"(,"answer_class":0})"),
                    SchemaError);
    // vit layout needs 768-wide image features.
    CHECK_THROWS_AS(parse_dataset(R"({"meta":{"C":3,"d_model":4,"feature_layout":"vit"}})" "\n" +
                                  sample_line("a", "i", 0)),
                    SchemaError);
    try {
        parse_dataset(kHeader + "\n" + sample_line("a", "i", 0) + "\n{oops");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("an image may not span two folds") {
    const std::string text = kHeader + "\n" + sample_line("a", "img", 0, R"(,"fold":0)") + "\n" +
                             sample_line("b", "img", 1, R"(,"fold":1)");
    CHECK_THROWS_AS(parse_dataset(text), SchemaError);
    const auto ok = parse_dataset(kHeader + "\n" + sample_line("a", "img", 0, R"(,"fold":1)") + "\n" +
                                  sample_line("b", "img", 1, R"(,"fold":1)"));
    CHECK(*ok.samples[1].fold == 1);
}

TEST_CASE("write then load reproduces the manifest exactly") {
    DatasetManifest m;
    m.class_count = 2;
    m.d_model = 3;
    Sample s;
    s.id = "x";
    s.image_id = "img";
    s.image_features = {0.1, 1.0 / 3.0, -2.5e-300};
    s.question_features = Vector(300, 0.7);
    s.answer_class = 1;
    s.fold = 2;
    m.samples.push_back(s);
    s.id = "y";
    s.question_features.reset();
    s.question_tokens = std::vector<std::int64_t>(50, 0);
    (*s.question_tokens)[0] = 12;
    m.samples.push_back(s);

    const auto path = temp_dir() / "roundtrip.jsonl";
    write_dataset(path, m);
    const auto back = load_dataset(path);
    REQUIRE(back.samples.size() == 2);
    CHECK(back.samples[0].image_features == m.samples[0].image_features);
    CHECK(*back.samples[0].question_features == *m.samples[0].question_features);
    CHECK(*back.samples[1].question_tokens == *m.samples[1].question_tokens);
    CHECK(*back.samples[1].fold == 2);
    CHECK(serialize_dataset(back) == serialize_dataset(m));
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
}

TEST_CASE("knowledge base") {
    const std::string fixture =
        R"({"id":"k0","text":"zero","embedding":[1,0,0]})" "\n"
        R"({"id":"k1","text":"one","embedding":[0,2,0]})" "\n"
        R"({"id":"k2","text":"two","embedding":[0.5,0.5,0.5]})" "\n";
    const auto kb = parse_knowledge_base(fixture);
    REQUIRE(kb.size() == 3);
    CHECK(kb[0].id == "k0");
    CHECK(kb[1].id == "k1");
    CHECK(kb[2].embedding == Vector{0.5, 0.5, 0.5});

    CHECK_THROWS_AS(parse_knowledge_base(R"({"id":"z","text":"","embedding":[0,0,0]})"), SchemaError);
    CHECK_THROWS_AS(parse_knowledge_base(fixture, 4), SchemaError);
    CHECK_THROWS_AS(parse_knowledge_base(fixture + R"({"id":"k3","text":"","embedding":[1,1]})"), SchemaError);

    std::vector<KnowledgeEntry> entries{{"a", "t", {0.1, 0.2, 1e-17}}, {"b", "u", {1.0 / 7.0, -3.0, 2.0}}};
    const auto path = temp_dir() / "kb.jsonl";
    write_knowledge_base(path, entries);
    const auto back = load_knowledge_base(path);
    CHECK(back[0].embedding == entries[0].embedding);
    CHECK(back[1].embedding == entries[1].embedding);
    CHECK_THROWS_AS(load_knowledge_base(temp_dir() / "missing.jsonl"), ParseError);
}
