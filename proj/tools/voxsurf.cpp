#include "voxsurf/app.hpp"

int main(int argc, char** argv) { return voxsurf::app::run(argc, argv); }
