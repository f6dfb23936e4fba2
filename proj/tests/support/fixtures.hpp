#pragma once

// Input and output files as printed in the tool's user documentation, plus the
// published field-evaluation table used for the MAPE checks.

#include <string>
#include <vector>

namespace fixtures {

// Only Hour1..Hour5 are legible in the printed short-term count sample; the
// remaining hours are filled with a fixed placeholder pattern.
inline std::string short_term_counts()
{
    const char* rows[] = {
        "1,80,10/19/2016,12,1,27,24,20,43,49",   "1,80,10/20/2016,12,2,26,27,20,20,40",
        "1,99,10/19/2016,12,1,436,317,231,301,545", "1,99,10/20/2016,12,1,459,293,285,318,547",
        "1,9,10/24/2017,2,1,35,22,21,33,74",     "1,10,11/28/2017,4,1,6,9,2,6,7",
        "1,11,11/14/2017,2,1,83,38,42,50,107",   "1,17,11/7/2017,4,1,9,6,9,12,12",
        "1,65,10/24/2017,4,1,2,3,10,12,7",       "1,73,10/24/2017,4,1,26,7,10,16,28",
        "1,133,11/7/2017,2,1,16,16,8,34,44",     "1,149,10/25/2017,2,1,138,74,76,84,212",
        "1,151,11/7/2017,4,1,15,7,8,14,17",      "1,152,11/7/2017,4,1,8,18,6,5,21",
        "1,153,11/7/2017,4,1,15,11,7,15,30",     "1,155,11/7/2017,4,1,43,25,21,20,54",
        "1,156,11/7/2017,4,1,20,19,14,23,55",
    };
    std::string s = "County,Station,Date,FClass,GF";
    for (int h = 1; h <= 24; ++h) s += ",Hour" + std::to_string(h);
    s += "\n";
    for (const char* r : rows) {
        s += r;
        for (int h = 6; h <= 24; ++h) s += "," + std::to_string(10 * h);
        s += "\n";
    }
    return s;
}

inline std::string expansion_factors()
{
    return "FC,2,3,4,5,9,12,13,14,15,18,\n"
           "Axle_f,0.91,0.93,0.94,0.96,0.96,0.96,0.93,0.94,0.97,0.97,\n"
           "Seasonal_f,1.15,1.07,1.05,1.04,1.04,1.04,0.98,1.01,1,1.04,\n"
           ",1.06,1.04,1.01,0.99,0.99,0.99,0.92,0.95,0.98,0.99,\n"
           ",1.02,0.97,0.97,0.94,0.94,0.94,0.91,0.95,0.92,0.94,\n"
           ",0.96,0.97,0.93,0.92,0.92,0.92,0.89,0.94,0.92,0.92,\n"
           ",0.96,0.97,0.93,0.93,0.93,0.93,0.93,1,0.89,0.93,\n"
           ",0.94,1.01,0.97,0.95,0.95,0.95,0.92,0.99,0.93,0.95,\n"
           ",0.91,0.96,0.96,0.94,0.94,0.94,0.96,1.04,0.96,0.94,\n"
           ",0.94,0.95,0.94,0.94,0.94,0.94,0.92,0.95,0.93,0.94,\n"
           ",1,1.01,0.98,0.97,0.97,0.97,0.95,0.95,0.89,0.97,\n"
           ",1,1.02,1.01,0.96,0.96,0.96,0.93,0.94,0.9,0.96,\n"
           ",1.05,1,1,0.98,0.98,0.98,0.96,0.95,0.93,0.98,\n"
           ",1.07,0.99,1.01,1,1,1,1,0.99,0.89,1,\n"
           ",,,,,,,,,,,\n";
}

inline std::string hyperparams() { return "C,Gamma,\n8,0.25,\n1,0.5,\n0.125,0.25,\n,,\n"; }

inline std::string output_file()
{
    return "County,Station,Functional_Class,AADT-SVR,AADT-Factor\n"
           "1,80,12,12120,12140\n1,99,12,60454,57415\n1,9,2,4131,3679\n1,10,4,2701,2493\n"
           "1,11,2,24432,23651\n1,17,4,1471,1311\n1,65,4,1022,896\n1,73,4,3950,3763\n"
           "1,133,2,2810,2678\n1,149,2,29021,27839\n1,151,4,3523,3389\n1,152,4,4467,4274\n"
           "1,153,4,3612,3389\n1,155,4,12257,11647\n1,156,4,2566,2333\n";
}

struct Table1Row {
    int atr;
    const char* group;
    double actual;
    double factor;
    double svr;
    int printed_ape_factor; // percent, as printed
    int printed_ape_svr;
};

inline const std::vector<Table1Row>& table1()
{
    static const std::vector<Table1Row> rows{
        {80, "Interstate", 7802, 7552, 7653, 3, 2},     {80, "Interstate", 7802, 8169, 7965, 5, 2},
        {81, "Interstate", 7341, 6855, 7052, 7, 4},     {81, "Interstate", 7341, 7423, 6989, 1, 5},
        {145, "Interstate", 21291, 21829, 22262, 3, 5}, {145, "Interstate", 21291, 22337, 21231, 5, 0},
        {100, "Interstate", 18458, 19323, 19939, 5, 8}, {100, "Interstate", 18458, 19312, 18444, 5, 0},
        {99, "Interstate", 50518, 48233, 51251, 5, 1},  {99, "Interstate", 50518, 50446, 51674, 0, 2},
        {9, "Arterial", 4051, 3659, 4169, 10, 3},       {11, "Arterial", 24741, 22153, 23241, 10, 6},
        {30, "Arterial", 20707, 16181, 19623, 22, 5},   {38, "Arterial", 4711, 4786, 4899, 2, 4},
        {47, "Arterial", 24472, 21700, 24124, 11, 1},   {57, "Arterial", 3274, 3124, 3418, 5, 4},
        {133, "Arterial", 2591, 2559, 2692, 1, 4},      {148, "Arterial", 28754, 24752, 28260, 14, 2},
        {149, "Arterial", 27269, 25989, 27517, 5, 1},   {17, "Collector", 1352, 1259, 1357, 7, 0},
        {73, "Collector", 3555, 3817, 3750, 7, 5},      {152, "Collector", 4203, 4096, 4192, 3, 0},
        {153, "Collector", 3437, 3427, 3407, 0, 1},     {154, "Collector", 6953, 6162, 6840, 11, 2},
        {155, "Collector", 10784, 11079, 11215, 3, 4},
    };
    return rows;
}

inline int table1_class_code(const Table1Row& r)
{
    const std::string g = r.group;
    return g == "Interstate" ? 12 : g == "Arterial" ? 2 : 4;
}

} // namespace fixtures
