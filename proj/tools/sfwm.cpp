#include "sfwm/app/commands.hpp"

int main(int argc, char** argv) { return sfwm::app::run_cli(argc, argv); }
