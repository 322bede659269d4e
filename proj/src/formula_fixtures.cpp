#include "cellcount/formula.hpp"

namespace cellcount {

// Shipped augmentation pools, one per (round, missing count). Transcribed
// verbatim; round 3 of the random-missing set repeats one formula for count
// 53, and the consecutive-missing set shares pools between rounds where the
// deleted counts overlap.
namespace {

const std::string kExp2Fixtures = R"(# round=1 experiment=2
14 = 5x(2) + 1x(4)
14 = 10x(1) + 1x(4)
14 = 1x(14)
35 = 23x(1) + 10x(1) + 1x(2)
35 = 10x(3) + 5x(1)
35 = 31x(1) + 1x(4)
35 = 27x(1) + 5x(1) + 1x(3)
35 = 10x(2) + 5x(3)
57 = 27x(1) + 10x(3)
57 = 48x(1) + 5x(1) + 1x(4)
57 = 23x(2) + 10x(1) + 1x(1)
57 = 27x(1) + 10x(1) + 5x(4)
57 = 18x(2) + 10x(2) + 1x(1)
66 = 31x(2) + 1x(4)
66 = 23x(2) + 10x(2)
66 = 61x(1) + 5x(1)
66 = 53x(1) + 10x(1) + 1x(3)
66 = 44x(1) + 10x(1) + 5x(2) + 1x(2)
83 = 40x(1) + 23x(1) + 10x(2)
83 = 53x(1) + 27x(1) + 1x(3)
83 = 78x(1) + 5x(1)
83 = 48x(1) + 31x(1) + 1x(4)
83 = 40x(2) + 1x(3)

# round=2 experiment=2
10 = 5x(1) + 1x(5)
10 = 5x(2)
10 = 1x(10)
31 = 14x(2) + 1x(3)
31 = 27x(1) + 1x(4)
31 = 18x(1) + 5x(2) + 1x(3)
31 = 23x(1) + 5x(1) + 1x(3)
70 = 40x(1) + 27x(1) + 1x(3)
70 = 66x(1) + 1x(4)
70 = 35x(2)
70 = 48x(1) + 18x(1) + 1x(4)
70 = 44x(1) + 18x(1) + 5x(1) + 1x(3)
83 = 44x(1) + 35x(1) + 1x(4)
83 = 78x(1) + 5x(1)
83 = 40x(2) + 1x(3)
83 = 66x(1) + 5x(3) + 1x(2)
83 = 35x(1) + 27x(1) + 5x(4) + 1x(1)
91 = 40x(1) + 27x(1) + 23x(1) + 1x(1)
91 = 87x(1) + 1x(4)
91 = 44x(1) + 40x(1) + 5x(1) + 1x(2)
91 = 74x(1) + 14x(1) + 1x(3)
91 = 78x(1) + 5x(2) + 1x(3)

# round=3 experiment=2
18 = 14x(1) + 1x(4)
18 = 10x(1) + 5x(1) + 1x(3)
18 = 10x(1) + 1x(8)
27 = 14x(1) + 10x(1) + 1x(3)
27 = 10x(2) + 5x(1) + 1x(2)
27 = 23x(1) + 1x(4)
44 = 23x(1) + 14x(1) + 5x(1) + 1x(2)
44 = 40x(1) + 1x(4)
44 = 14x(1) + 10x(2) + 5x(2)
44 = 35x(1) + 5x(1) + 1x(4)
44 = 31x(1) + 5x(2) + 1x(3)
53 = 40x(1) + 10x(1) + 1x(3)
53 = 48x(1) + 5x(1)
53 = 23x(1) + 10x(3)
53 = 48x(1) + 1x(5)
53 = 40x(1) + 10x(1) + 1x(3)
91 = 48x(1) + 40x(1) + 1x(3)
91 = 87x(1) + 1x(4)
91 = 70x(1) + 5x(4) + 1x(1)
91 = 78x(1) + 10x(1) + 1x(3)
91 = 61x(1) + 10x(1) + 5x(4)
)";

const std::string kExp3Fixtures = R"(# round=1 experiment=3
61 = 35x(1) + 23x(1) + 1x(3)
61 = 31x(1) + 10x(3)
61 = 48x(1) + 10x(1) + 1x(3)
61 = 27x(1) + 23x(1) + 10x(1) + 1x(1)
61 = 40x(1) + 5x(4) + 1x(1)
66 = 27x(1) + 23x(1) + 10x(1) + 5x(1) + 1x(1)
66 = 48x(1) + 18x(1)
66 = 18x(2) + 10x(2) + 5x(2)
66 = 57x(1) + 5x(1) + 1x(4)
66 = 44x(1) + 10x(1) + 5x(2) + 1x(2)
70 = 40x(1) + 10x(2) + 5x(2)
70 = 35x(2)
70 = 40x(1) + 27x(1) + 1x(3)
70 = 44x(1) + 18x(1) + 5x(1) + 1x(3)
70 = 57x(1) + 10x(1) + 1x(3)
74 = 27x(1) + 23x(1) + 14x(1) + 10x(1)
74 = 44x(1) + 27x(1) + 1x(3)
74 = 57x(1) + 14x(1) + 1x(3)
74 = 53x(1) + 18x(1) + 1x(3)
74 = 48x(1) + 14x(1) + 10x(1) + 1x(2)
78 = 40x(1) + 35x(1) + 1x(3)
78 = 57x(1) + 18x(1) + 1x(3)
78 = 27x(2) + 14x(1) + 10x(1)
78 = 53x(1) + 23x(1) + 1x(2)
78 = 48x(1) + 14x(1) + 10x(1) + 5x(1) + 1x(1)

# round=2 experiment=3
70 = 40x(1) + 10x(2) + 5x(2)
70 = 35x(2)
70 = 40x(1) + 27x(1) + 1x(3)
70 = 44x(1) + 18x(1) + 5x(1) + 1x(3)
70 = 57x(1) + 10x(1) + 1x(3)
74 = 27x(1) + 23x(1) + 14x(1) + 10x(1)
74 = 44x(1) + 27x(1) + 1x(3)
74 = 57x(1) + 14x(1) + 1x(3)
74 = 53x(1) + 18x(1) + 1x(3)
74 = 48x(1) + 14x(1) + 10x(1) + 1x(2)
78 = 40x(1) + 35x(1) + 1x(3)
78 = 57x(1) + 18x(1) + 1x(3)
78 = 27x(2) + 14x(1) + 10x(1)
78 = 53x(1) + 23x(1) + 1x(2)
78 = 48x(1) + 14x(1) + 10x(1) + 5x(1) + 1x(1)
83 = 27x(1) + 23x(2) + 10x(1)
83 = 53x(1) + 10x(2) + 5x(2)
83 = 27x(1) + 23x(1) + 18x(1) + 10x(1) + 5x(1)
83 = 66x(1) + 10x(1) + 5x(1) + 1x(2)
83 = 40x(2) + 1x(3)
87 = 44x(1) + 23x(1) + 10x(2)
87 = 57x(1) + 14x(1) + 10x(1) + 5x(1) + 1x(1)
87 = 66x(1) + 10x(1) + 5x(2) + 1x(1)
87 = 44x(1) + 23x(1) + 10x(1) + 5x(2)
87 = 48x(1) + 10x(2) + 5x(3) + 1x(4)

# round=3 experiment=3
83 = 27x(1) + 23x(2) + 10x(1)
83 = 53x(1) + 10x(2) + 5x(2)
83 = 27x(1) + 23x(1) + 18x(1) + 10x(1) + 5x(1)
83 = 66x(1) + 10x(1) + 5x(1) + 1x(2)
83 = 40x(2) + 1x(3)
87 = 44x(1) + 23x(1) + 10x(2)
87 = 57x(1) + 14x(1) + 10x(1) + 5x(1) + 1x(1)
87 = 66x(1) + 10x(1) + 5x(2) + 1x(1)
87 = 44x(1) + 23x(1) + 10x(1) + 5x(2)
87 = 48x(1) + 10x(2) + 5x(3) + 1x(4)
91 = 61x(1) + 27x(1) + 1x(3)
91 = 57x(1) + 14x(1) + 10x(2)
91 = 27x(2) + 23x(1) + 14x(1)
91 = 78x(1) + 10x(1) + 1x(3)
91 = 61x(1) + 10x(1) + 5x(4)
96 = 40x(1) + 27x(1) + 23x(1) + 5x(1) + 1x(1)
96 = 74x(1) + 10x(2) + 1x(2)
96 = 35x(1) + 31x(1) + 5x(6)
96 = 78x(1) + 18x(1)
96 = 74x(1) + 14x(1) + 5x(1) + 1x(3)
100 = 27x(2) + 23x(2)
100 = 70x(1) + 10x(2) + 5x(2)
100 = 44x(1) + 18x(2) + 10x(2)
100 = 78x(1) + 18x(1) + 1x(4)
100 = 74x(1) + 14x(1) + 5x(2) + 1x(2)
)";

}  // namespace

const std::string& formula_fixture_text(FixtureSet which) {
    return which == FixtureSet::Exp2 ? kExp2Fixtures : kExp3Fixtures;
}

}  // namespace cellcount
