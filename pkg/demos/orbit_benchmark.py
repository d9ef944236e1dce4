"""
Measure what empty-space skipping buys on a sparse scene
========================================================

Shrunk, denser spheres leave most macroblocks empty. Timing the same orbit
with skipping on and off isolates the win during the march stage; deferred
shading costs the same either way.
"""

import os

from snerg import BakeConfig, RenderConfig, bake, benchmark_orbit, make_scene, orbit_cameras, quantize_grid

out_dir = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(out_dir, exist_ok=True)

scene = make_scene("lambert-spheres", radius_scale=0.6, density=150.0)
rig = orbit_cameras(8, 3.0, 30.0, 80.0, 64, 64) + orbit_cameras(8, 3.0, -30.0, 80.0, 64, 64)
config = BakeConfig(grid_resolution=128, block_size=16)
grid = quantize_grid(bake(scene, rig, config))
occupancy = grid.occupied_count / config.blocks_per_axis**3
print(f"occupancy: {grid.occupied_count}/{config.blocks_per_axis**3} blocks ({occupancy:.1%})")

# focal 300 at 200x200 fills the frame with the scene box; with the default
# wide framing most rays never enter the grid and ray setup dominates
render_cfg = dict(width=200, height=200, focal=300.0)

skipping = benchmark_orbit(
    grid, scene.mlp, 6, RenderConfig(**render_cfg), out_path=os.path.join(out_dir, "orbit_skip.txt")
)
dense = benchmark_orbit(grid, scene.mlp, 6, RenderConfig(**render_cfg, skip_empty=False))

print(f"march with skipping: {skipping['march_ms_mean']:.1f} ms/frame")
print(f"march without:       {dense['march_ms_mean']:.1f} ms/frame")
print(f"speedup: {dense['march_ms_mean'] / skipping['march_ms_mean']:.2f}x")
print(f"report written to {os.path.join(out_dir, 'orbit_skip.txt')}")
