# Simulation layer: source, interference, fiber, counting and fitting models.
