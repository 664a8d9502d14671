#include "doctest.h"

#include <sstream>

#include "lgsum/conllu.hpp"

using namespace lgsum::conllu;

namespace {

const char* kTwoTokenSentence =
    "1\tThe\t_\t_\t_\t_\t2\tdet\t_\t_\n"
    "2\tissues\t_\t_\t_\t_\t0\troot\t_\t_\n";

DependencyTree tree_from_heads(const std::vector<int>& heads) {
    DependencyTree t;
    for (std::size_t i = 0; i < heads.size(); ++i)
        t.tokens.push_back({"w" + std::to_string(i + 1), heads[i], "dep"});
    return t;
}

} // namespace

TEST_CASE("parse_conllu maps the four consumed columns") {
    std::istringstream in(kTwoTokenSentence);
    auto result = parse_conllu(in);
    REQUIRE(result.documents.size() == 1);
    REQUIRE(result.documents[0].sentences.size() == 1);
    const DependencyTree& t = result.documents[0].sentences[0];
    REQUIRE(t.size() == 2);
    CHECK(t.tokens[0].surface == "The");
    CHECK(t.tokens[0].head == 2);
    CHECK(t.tokens[0].deprel == "det");
    CHECK(t.tokens[1].head == 0);
}

TEST_CASE("parse_conllu on empty input yields an empty list") {
    std::istringstream in("");
    CHECK(parse_conllu(in).documents.empty());
}

TEST_CASE("parse_conllu skips multiword ranges and empty nodes") {
    std::istringstream in(
        "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "1\tdo\t_\t_\t_\t_\t0\troot\t_\t_\n"
        "2\tnot\t_\t_\t_\t_\t1\tadvmod\t_\t_\n"
        "2.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_\n");
    auto result = parse_conllu(in);
    REQUIRE(result.documents.size() == 1);
    CHECK(result.documents[0].sentences[0].size() == 2);
}

TEST_CASE("parse_conllu error cases carry line numbers") {
    SUBCASE("wrong column count") {
        std::istringstream in("1\tonly\tthree\n");
        CHECK_THROWS_WITH_AS(parse_conllu(in),
                             doctest::Contains("line 1"), std::runtime_error);
    }
    SUBCASE("non-integer head") {
        std::istringstream in("1\tThe\t_\t_\t_\t_\tx\tdet\t_\t_\n");
        CHECK_THROWS_WITH_AS(parse_conllu(in),
                             doctest::Contains("non-integer HEAD"), std::runtime_error);
    }
    SUBCASE("duplicate id") {
        std::istringstream in(
            "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n"
            "1\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n");
        CHECK_THROWS_WITH_AS(parse_conllu(in),
                             doctest::Contains("duplicate ID"), std::runtime_error);
    }
    SUBCASE("invalid tree aborts by default") {
        std::istringstream in(
            "1\ta\t_\t_\t_\t_\t2\tdep\t_\t_\n"
            "2\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n");
        CHECK_THROWS_WITH_AS(parse_conllu(in),
                             doctest::Contains("invalid dependency tree"), std::runtime_error);
    }
    SUBCASE("permissive mode skips and counts") {
        std::istringstream in(
            "1\ta\t_\t_\t_\t_\t2\tdep\t_\t_\n"
            "2\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n"
            "\n"
            "1\tok\t_\t_\t_\t_\t0\troot\t_\t_\n");
        ParseOptions opts;
        opts.permissive = true;
        auto result = parse_conllu(in, opts);
        CHECK(result.skipped_sentences == 1);
        REQUIRE(result.documents.size() == 1);
        CHECK(result.documents[0].sentences.size() == 1);
    }
}

TEST_CASE("newdoc comments open documents") {
    std::istringstream in(
        "# newdoc id = alpha\n"
        "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n"
        "\n"
        "# newdoc id = beta\n"
        "1\tb\t_\t_\t_\t_\t0\troot\t_\t_\n");
    auto result = parse_conllu(in);
    REQUIRE(result.documents.size() == 2);
    CHECK(result.documents[0].doc_id == "alpha");
    CHECK(result.documents[1].doc_id == "beta");
}

TEST_CASE("validate_tree diagnostics") {
    CHECK(validate_tree(tree_from_heads({2, 0, 2})) == "");
    CHECK(validate_tree(tree_from_heads({2, 1})) == "cycle at token 1");
    CHECK(validate_tree(tree_from_heads({0, 0})) == "multiple roots");
    CHECK(validate_tree(tree_from_heads({0, 5})) == "head out of range");
    // self-head is the degenerate 1-cycle
    CHECK(validate_tree(tree_from_heads({1, 0})) == "cycle at token 1");
    // a cycle hanging off a valid root: 1<-root, 2->3, 3->2
    CHECK(validate_tree(tree_from_heads({0, 3, 2})) == "cycle at token 2");
}

TEST_CASE("every parsed tree passes validate_tree") {
    std::istringstream in(kTwoTokenSentence);
    auto result = parse_conllu(in);
    for (const auto& doc : result.documents)
        for (const auto& sent : doc.sentences) CHECK(validate_tree(sent) == "");
}

TEST_CASE("round trip through serialize is lossless on consumed fields") {
    std::istringstream in(
        "# newdoc id = d1\n"
        "1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_\n"
        "2\tissues\tissue\tNOUN\t_\t_\t0\troot\t_\t_\n"
        "\n"
        "1\tGood\t_\t_\t_\t_\t0\troot\t_\t_\n"
        "\n"
        "# newdoc id = d2\n"
        "1\tMore\t_\t_\t_\t_\t0\troot\t_\t_\n");
    auto first = parse_conllu(in);
    std::istringstream again(serialize(first.documents));
    auto second = parse_conllu(again);
    REQUIRE(first.documents.size() == second.documents.size());
    for (std::size_t d = 0; d < first.documents.size(); ++d) {
        REQUIRE(first.documents[d].sentences.size() == second.documents[d].sentences.size());
        for (std::size_t s = 0; s < first.documents[d].sentences.size(); ++s) {
            const auto& a = first.documents[d].sentences[s];
            const auto& b = second.documents[d].sentences[s];
            REQUIRE(a.size() == b.size());
            for (int i = 0; i < a.size(); ++i) {
                CHECK(a.tokens[i].surface == b.tokens[i].surface);
                CHECK(a.tokens[i].head == b.tokens[i].head);
                CHECK(a.tokens[i].deprel == b.tokens[i].deprel);
            }
        }
    }
}

TEST_CASE("golden fixture parses to the recorded six-token tree") {
    auto result = parse_conllu_file(std::string(LGSUM_DATA_DIR) + "/fixtures/vexing.conllu");
    REQUIRE(result.documents.size() == 1);
    REQUIRE(result.documents[0].sentences.size() == 1);
    const DependencyTree& t = result.documents[0].sentences[0];
    REQUIRE(t.size() == 6);
    const std::vector<int> heads = {2, 4, 4, 0, 6, 4};
    const std::vector<std::string> forms = {"The", "issues", "are", "vexing", "and", "complex"};
    for (int i = 0; i < 6; ++i) {
        CHECK(t.tokens[i].head == heads[i]);
        CHECK(t.tokens[i].surface == forms[i]);
    }
    CHECK(validate_tree(t) == "");
}
