#include "hotspot/fleet_sim.hpp"
int main(){return 0;}
