#pragma once

#include <string>

#include "subrct/data_model.hpp"

namespace fixtures {

// 12 units, two subgroups, balanced arms, one covariate.
inline const char* kSimpleCsv =
    "id,y,t,grp,x\n"
    "1,5,1,a,1\n"
    "2,7,1,a,2\n"
    "3,6,1,a,0\n"
    "4,1,0,a,2\n"
    "5,2,0,a,1\n"
    "6,3,0,a,1\n"
    "7,10,1,b,-1\n"
    "8,8,1,b,0\n"
    "9,9,1,b,1\n"
    "10,4,0,b,0\n"
    "11,5,0,b,1\n"
    "12,9,0,b,2\n";

// Two blocks with rates 1/2 and 1/3.
inline const char* kBlockedCsv =
    "id,y,t,grp,blk,x\n"
    "1,5,1,a,s1,1\n"
    "2,7,1,a,s1,2\n"
    "3,1,0,a,s1,0\n"
    "4,3,0,a,s1,1\n"
    "5,9,1,b,s1,1\n"
    "6,11,1,b,s1,0\n"
    "7,6,0,b,s1,2\n"
    "8,4,0,b,s1,1\n"
    "9,6,1,a,s2,1\n"
    "10,8,1,a,s2,2\n"
    "11,2,0,a,s2,0\n"
    "12,4,0,a,s2,1\n"
    "13,3,0,a,s2,2\n"
    "14,5,0,a,s2,1\n"
    "15,12,1,b,s2,0\n"
    "16,10,1,b,s2,1\n"
    "17,7,0,b,s2,2\n"
    "18,5,0,b,s2,0\n"
    "19,8,0,b,s2,1\n"
    "20,6,0,b,s2,2\n";

// 6 clusters, both subgroups inside every cluster, 3 treated.
inline const char* kClusteredCsv =
    "id,y,t,grp,cl\n"
    "1,4,1,a,c1\n"
    "2,6,1,a,c1\n"
    "3,8,1,b,c1\n"
    "4,9,1,b,c1\n"
    "5,10,1,b,c1\n"
    "6,5,1,a,c2\n"
    "7,7,1,a,c2\n"
    "8,9,1,a,c2\n"
    "9,11,1,b,c2\n"
    "10,9,1,b,c2\n"
    "11,6,1,a,c3\n"
    "12,5,1,a,c3\n"
    "13,10,1,b,c3\n"
    "14,12,1,b,c3\n"
    "15,1,0,a,c4\n"
    "16,3,0,a,c4\n"
    "17,5,0,b,c4\n"
    "18,6,0,b,c4\n"
    "19,7,0,b,c4\n"
    "20,2,0,a,c5\n"
    "21,4,0,a,c5\n"
    "22,3,0,a,c5\n"
    "23,6,0,b,c5\n"
    "24,8,0,b,c5\n"
    "25,2,0,a,c6\n"
    "26,2,0,a,c6\n"
    "27,7,0,b,c6\n"
    "28,9,0,b,c6\n";

// 8 clusters, each wholly inside one subgroup.
inline const char* kClusterSubgroupCsv =
    "id,y,t,grp,cl\n"
    "1,4,1,a,d1\n"
    "2,6,1,a,d1\n"
    "3,5,1,a,d2\n"
    "4,7,1,a,d2\n"
    "5,9,1,a,d2\n"
    "6,8,1,b,d3\n"
    "7,9,1,b,d3\n"
    "8,10,1,b,d3\n"
    "9,11,1,b,d4\n"
    "10,9,1,b,d4\n"
    "11,1,0,a,d5\n"
    "12,3,0,a,d5\n"
    "13,2,0,a,d6\n"
    "14,4,0,a,d6\n"
    "15,3,0,a,d6\n"
    "16,5,0,b,d7\n"
    "17,6,0,b,d7\n"
    "18,7,0,b,d7\n"
    "19,6,0,b,d8\n"
    "20,8,0,b,d8\n";

// Fixture A with response flags and nonresponse weights.
inline const char* kNonresponseCsv =
    "id,y,t,grp,resp,wt\n"
    "1,5,1,a,1,1\n"
    "2,7,1,a,1,2\n"
    "3,6,1,a,1,1\n"
    "4,1,0,a,1,1\n"
    "5,2,0,a,1,2\n"
    "6,3,0,a,0,1\n"
    "7,10,1,b,1,1\n"
    "8,8,1,b,1,1.5\n"
    "9,9,1,b,0,1\n"
    "10,4,0,b,1,2\n"
    "11,5,0,b,1,1\n"
    "12,9,0,b,1,1\n";

inline subrct::Dataset simple_dataset(double p = 0.5) {
  subrct::CsvSchema s;
  s.id = "id";
  s.y = "y";
  s.t = "t";
  s.subgroup = "grp";
  s.covariates = {"x"};
  subrct::DesignSpec d;
  d.p = p;
  return subrct::read_csv_string(kSimpleCsv, s, d);
}

inline subrct::TrialFrame simple_frame(double p = 0.5) {
  return subrct::to_frame(simple_dataset(p));
}

inline subrct::Dataset blocked_dataset() {
  subrct::CsvSchema s;
  s.id = "id";
  s.y = "y";
  s.t = "t";
  s.subgroup = "grp";
  s.block = "blk";
  s.covariates = {"x"};
  subrct::DesignSpec d;
  d.structure = subrct::Structure::Blocked;
  d.block_p = {{"s1", 0.5}, {"s2", 1.0 / 3.0}};
  return subrct::read_csv_string(kBlockedCsv, s, d);
}

inline subrct::TrialFrame blocked_frame() {
  return subrct::to_frame(blocked_dataset());
}

inline subrct::Dataset clustered_dataset(
    subrct::ClusterWeighting w = subrct::ClusterWeighting::SubgroupSize) {
  subrct::CsvSchema s;
  s.id = "id";
  s.y = "y";
  s.t = "t";
  s.subgroup = "grp";
  s.cluster = "cl";
  subrct::DesignSpec d;
  d.structure = subrct::Structure::Clustered;
  d.p = 0.5;
  d.cluster_weighting = w;
  return subrct::read_csv_string(kClusteredCsv, s, d);
}

inline subrct::TrialFrame clustered_frame(
    subrct::ClusterWeighting w = subrct::ClusterWeighting::SubgroupSize) {
  return subrct::to_frame(clustered_dataset(w));
}

inline subrct::TrialFrame cluster_subgroup_frame() {
  subrct::CsvSchema s;
  s.id = "id";
  s.y = "y";
  s.t = "t";
  s.subgroup = "grp";
  s.cluster = "cl";
  subrct::DesignSpec d;
  d.structure = subrct::Structure::Clustered;
  d.p = 0.5;
  return subrct::to_frame(subrct::read_csv_string(kClusterSubgroupCsv, s, d));
}

inline subrct::TrialFrame nonresponse_frame() {
  subrct::CsvSchema s;
  s.id = "id";
  s.y = "y";
  s.t = "t";
  s.subgroup = "grp";
  s.responded = "resp";
  s.weight = "wt";
  subrct::DesignSpec d;
  d.p = 0.5;
  return subrct::to_frame(subrct::read_csv_string(kNonresponseCsv, s, d));
}

}  // namespace fixtures
