#include "qmdp/experiment.hpp"

int main(int argc, char** argv) { return qmdp::cli_main(argc, argv); }
