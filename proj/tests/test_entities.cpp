#include <gtest/gtest.h>

#include "pgcloda/entities.hpp"
#include "support.hpp"

using namespace pgcloda;
using testing_support::TempDir;
using testing_support::write_file;

namespace {

EntityTables write_tables(const TempDir& dir, const std::string& peptides, const std::string& microbes = "",
                          const std::string& diseases = "") {
  write_file(dir.path() / "p.tsv", "id\tsequence\n" + peptides);
  write_file(dir.path() / "m.tsv", "id\tname\n" + microbes);
  write_file(dir.path() / "d.tsv", "id\tname\n" + diseases);
  return {dir.path() / "p.tsv", dir.path() / "m.tsv", dir.path() / "d.tsv"};
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Entities, LengthFilterDropsLongPeptides) {
  TempDir dir("ent");
  auto reg = load_entities(write_tables(dir, "p1\tKWK\np2\tACDEFGHIKL\n"));
  ASSERT_EQ(reg.num_peptides(), 1u);
  EXPECT_EQ(reg.peptides()[0].id, "p1");
  EXPECT_TRUE(reg.discarded_peptides().count("p2"));
}

TEST(Entities, SingleResidueDropped) {
  TempDir dir("ent");
  auto reg = load_entities(write_tables(dir, "p1\tK\np2\tKK\n"));
  ASSERT_EQ(reg.num_peptides(), 1u);
  EXPECT_EQ(reg.peptides()[0].id, "p2");
}

TEST(Entities, EmptyMicrobeTable) {
  TempDir dir("ent");
  auto reg = load_entities(write_tables(dir, "p1\tKK\n"));
  EXPECT_EQ(reg.num_microbes(), 0u);
}

TEST(Entities, DuplicateIdNamesTheId) {
  TempDir dir("ent");
  auto tables = write_tables(dir, "p1\tKK\np1\tRR\n");
  const std::string msg = error_of([&] { load_entities(tables); });
  EXPECT_NE(msg.find("p1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;
}

TEST(Entities, MalformedResidueReportsLine) {
  TempDir dir("ent");
  auto tables = write_tables(dir, "p1\tKK\np2\tK1K\n");
  const std::string msg = error_of([&] { load_entities(tables); });
  EXPECT_NE(msg.find(":3:"), std::string::npos) << msg;
}

TEST(Entities, WrongHeaderRejected) {
  TempDir dir("ent");
  write_file(dir.path() / "p.tsv", "identifier\tseq\np1\tKK\n");
  write_file(dir.path() / "m.tsv", "id\tname\n");
  write_file(dir.path() / "d.tsv", "id\tname\n");
  EXPECT_THROW(load_entities({dir.path() / "p.tsv", dir.path() / "m.tsv", dir.path() / "d.tsv"}), InputError);
}

TEST(Entities, CanonicalizeMicrobe) {
  logging::quiet() = true;
  EXPECT_EQ(canonicalize_microbe("Staphylococcus aureus ATCC 29213"), "Staphylococcus aureus");
  EXPECT_EQ(canonicalize_microbe("Escherichia coli"), "Escherichia coli");
  EXPECT_EQ(canonicalize_microbe("staphylococcus AUREUS BAA-44"), "Staphylococcus aureus");
  EXPECT_EQ(canonicalize_microbe("Bacteroides"), "Bacteroides");
}

TEST(Entities, StrainsMergeIntoFirstOccurrence) {
  TempDir dir("ent");
  auto reg = merge_strains(load_entities(
      write_tables(dir, "p1\tKK\n", "m1\tStaphylococcus aureus ATCC 29213\nm2\tEscherichia coli\nm3\tstaphylococcus aureus BAA-44\n")));
  ASSERT_EQ(reg.num_microbes(), 2u);
  EXPECT_EQ(reg.microbe_aliases().at("m3"), "m1");
}

TEST(Entities, RedundancyFilterExamples) {
  logging::quiet() = true;
  auto make = [](std::vector<std::string> seqs) {
    EntityRegistry reg;
    for (std::size_t i = 0; i < seqs.size(); ++i) reg.add_peptide({"p" + std::to_string(i), seqs[i]});
    return reg;
  };
  EXPECT_EQ(redundancy_filter(make({"KWKW", "KWKW"}), 0.7).num_peptides(), 1u);
  EXPECT_EQ(redundancy_filter(make({"KWKW", "ACDE"}), 0.7).num_peptides(), 2u);
  auto r = redundancy_filter(make({"KWKWK", "KWKWR"}), 0.7);
  ASSERT_EQ(r.num_peptides(), 1u);
  EXPECT_EQ(r.peptide_aliases().at("p1"), "p0");
  // identity 0.8 is not above 0.8
  EXPECT_EQ(redundancy_filter(make({"KWKWK", "KWKWR"}), 0.8).num_peptides(), 2u);
}

TEST(Entities, RedundancyFilterKeepsLongerPeptide) {
  logging::quiet() = true;
  EntityRegistry reg;
  reg.add_peptide({"short", "KWK"});
  reg.add_peptide({"long", "KWKAC"});
  auto r = redundancy_filter(reg, 0.7);
  ASSERT_EQ(r.num_peptides(), 1u);
  EXPECT_EQ(r.peptides()[0].id, "long");
  EXPECT_EQ(r.peptide_aliases().at("short"), "long");
}

TEST(Entities, RedundancyThresholdValidated) {
  EXPECT_THROW(redundancy_filter(EntityRegistry{}, 1.5), ConfigError);
  EXPECT_THROW(redundancy_filter(EntityRegistry{}, -0.1), ConfigError);
}

class AssociationFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    logging::quiet() = true;
    tables = write_tables(dir, "p1\tKK\np2\tACDEFGHIKLM\n", "m1\tEscherichia coli\n", "d1\tsepsis\n");
    reg = load_entities(tables);
  }
  std::vector<RawAssociation> load(const std::string& rows, AssociationLoadStats* stats = nullptr) {
    write_file(dir.path() / "e.tsv", "relation\tsrc_id\tdst_id\n" + rows);
    return load_associations(dir.path() / "e.tsv", reg, stats);
  }
  TempDir dir{"assoc"};
  EntityTables tables;
  EntityRegistry reg;
};

TEST_F(AssociationFixture, HappyPath) {
  auto recs = load("pm\tp1\tm1\n");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].relation, Relation::PeptideMicrobe);
}

TEST_F(AssociationFixture, DuplicatesCollapse) {
  AssociationLoadStats stats;
  auto recs = load("pd\tp1\td1\npd\tp1\td1\n", &stats);
  EXPECT_EQ(recs.size(), 1u);
  EXPECT_EQ(stats.duplicates, 1u);
}

TEST_F(AssociationFixture, UnresolvedIdIsFatalWithLine) {
  const std::string msg = error_of([&] { load("pm\tp1\tm1\npd\tp9\td1\n"); });
  EXPECT_NE(msg.find("p9"), std::string::npos) << msg;
  EXPECT_NE(msg.find(":3:"), std::string::npos) << msg;
}

TEST_F(AssociationFixture, UnknownTagIsFatal) {
  EXPECT_THROW(load("xx\tp1\tm1\n"), InputError);
}

TEST_F(AssociationFixture, DiscardedPeptideRowsSkipped) {
  AssociationLoadStats stats;
  auto recs = load("pd\tp2\td1\npd\tp1\td1\n", &stats);
  EXPECT_EQ(recs.size(), 1u);
  EXPECT_EQ(stats.skipped_discarded, 1u);
}

TEST(Entities, TablesRoundTrip) {
  logging::quiet() = true;
  TempDir dir("rt");
  EntityRegistry reg;
  reg.add_peptide({"p1", "KWK"});
  reg.add_microbe({"m1", "Escherichia coli"});
  reg.add_disease({"d1", "sepsis"});
  write_entity_tables(reg, dir.path());
  auto back = load_entities({dir.path() / "peptides.tsv", dir.path() / "microbes.tsv", dir.path() / "diseases.tsv"});
  EXPECT_EQ(back.peptides()[0].sequence, "KWK");
  EXPECT_EQ(back.microbes()[0].canonical_name, "Escherichia coli");
  EXPECT_EQ(back.diseases()[0].name, "sepsis");
}
