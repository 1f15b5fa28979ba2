#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "sdoc/core.hpp"
#include "sdoc/dataset_io.hpp"
#include "sdoc/error.hpp"
#include "support/test_support.hpp"

using namespace sdoc;
using sdoc::test::error_code_of;

TEST_CASE("each task maps to exactly one metric") {
  CHECK(metric_for(Task::OpenDomainQA) == Metric::EM);
  CHECK(metric_for(Task::MultiHopQA) == Metric::F1);
  CHECK(metric_for(Task::FactVerification) == Metric::EM);
  CHECK(metric_for(Task::LongFormQA) == Metric::F1);
}

TEST_CASE("sfl_code encodes axis initials in order") {
  CHECK(sfl_code({Interpersonal::Authoritative, Ideational::FineGrain, Textual::Structured}) ==
        "AFS");
  CHECK(sfl_code({Interpersonal::Conversational, Ideational::CoarseGrain,
                  Textual::Unstructured}) == "CCU");
}

TEST_CASE("sfl_code is a bijection over the 8 types") {
  std::set<std::string> codes;
  for (SflType type : all_sfl_types()) {
    const std::string code = sfl_code(type);
    CHECK(codes.insert(code).second);
    CHECK(parse_sfl_code(code) == type);
  }
  CHECK(codes == std::set<std::string>{"AFS", "AFU", "ACS", "ACU", "CFS", "CFU", "CCS", "CCU"});
}

TEST_CASE("parse_sfl_code is case-insensitive") {
  const SflType afu = parse_sfl_code("afu");
  CHECK(afu.interpersonal == Interpersonal::Authoritative);
  CHECK(afu.ideational == Ideational::FineGrain);
  CHECK(afu.textual == Textual::Unstructured);
  CHECK(parse_sfl_code("AFS") ==
        SflType{Interpersonal::Authoritative, Ideational::FineGrain, Textual::Structured});
}

TEST_CASE("parse_sfl_code rejects anything outside the eight codes") {
  for (const char* bad : {"XYZ", "WIKI", "", "AF", "AFSS", "BFS"}) {
    CHECK(error_code_of([&] { parse_sfl_code(bad); }) == ErrorCode::UnknownCode);
  }
}

TEST_CASE("wiki and genread doc types carry no SFL axes") {
  CHECK(!DocType::wiki().style.has_value());
  CHECK(!DocType::genread().style.has_value());
  CHECK(doc_type_code(DocType::wiki()) == "WIKI");
  CHECK(doc_type_code(DocType::genread()) == "GENREAD");
  CHECK(parse_doc_type_code("wiki") == DocType::wiki());
  CHECK(parse_doc_type_code("AFU") == DocType::sfl(parse_sfl_code("AFU")));
}

TEST_CASE("gold answers validate their shape") {
  CHECK_THROWS_AS(GoldAnswer::of_answers({}), Error);
  const GoldAnswer qa = GoldAnswer::of_answers({"Paris"});
  CHECK(qa.answers.size() == 1);
  CHECK(!qa.label.has_value());
  const GoldAnswer fever = GoldAnswer::of_label(FeverLabel::Supports);
  CHECK(fever.label == FeverLabel::Supports);
}

TEST_CASE("self_doc_id changes with every identifying field") {
  const DocType afu = DocType::sfl(parse_sfl_code("AFU"));
  const std::string base = self_doc_id("q1", afu, 0, "m1");
  CHECK(base == self_doc_id("q1", afu, 0, "m1"));
  CHECK(base != self_doc_id("q2", afu, 0, "m1"));
  CHECK(base != self_doc_id("q1", DocType::sfl(parse_sfl_code("CCU")), 0, "m1"));
  CHECK(base != self_doc_id("q1", afu, 1, "m1"));
  CHECK(base != self_doc_id("q1", afu, 0, "m2"));
}

TEST_CASE("document json round trip is byte-stable") {
  std::mt19937_64 rng(7);
  const auto types = all_sfl_types();
  for (int i = 0; i < 50; ++i) {
    Document doc;
    doc.id = "doc-" + std::to_string(rng() % 1000);
    doc.text = "text \"quoted\" \n with unicode: caf\xc3\xa9 " + std::to_string(rng());
    switch (rng() % 3) {
      case 0:
        doc.doc_type = DocType::sfl(types[rng() % types.size()]);
        doc.source = DocSource::SelfGenerated;
        doc.origin_query_id = "q" + std::to_string(rng() % 10);
        doc.replicate_index = static_cast<int>(rng() % 10);
        break;
      case 1:
        doc.doc_type = DocType::wiki();
        doc.source = DocSource::Retrieved;
        doc.rank = static_cast<int>(rng() % 10) + 1;
        break;
      default:
        doc.doc_type = DocType::sfl(types[rng() % types.size()]);
        doc.source = DocSource::StyleTransformed;
        doc.origin_query_id = "q" + std::to_string(rng() % 10);
        doc.rank = static_cast<int>(rng() % 10) + 1;
        break;
    }
    const auto once = document_to_json(doc);
    const Document parsed = document_from_json(once);
    const auto twice = document_to_json(parsed);
    CHECK(once.dump() == twice.dump());
    CHECK(parsed == doc);
  }
}
