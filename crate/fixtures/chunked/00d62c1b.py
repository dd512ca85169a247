def identify_objects(grid: Grid) -> Objects:
  # Input: grid (Grid), the input grid.
  # Goal: Identify and separate objects within the input grid based on color and connectivity.
  # Output: objects (Objects), a set of objects identified in the input grid.
  # Core Knowledge: Object cohesion (parsing grids, identifying distinct objects based on spatial contiguity)
  return as_objects(grid=grid, discard_background=False)
    
def filter_objects_by_color(objects: Objects, color: Color) -> Objects:
  # Input: objects (Objects), a set of objects; color (Color), the color to filter by.
  # Goal: Filter the set of objects to keep only those of the specified color.
  # Output: filtered_objects (Objects), a subset of the input objects containing only objects of the specified color.
  # Core Knowledge: Object cohesion (filtering objects based on color)
  return color_filter(objs=objects, color=color)

def find_internal_objects(objects: Objects, grid: Grid) -> FrozenSet:
  # Input: objects (Objects), a set of objects; grid (Grid), the input grid.
  # Goal: Identify objects that are not bordering the grid.
  # Output: internal_objects (FrozenSet), a set of indices representing the locations of the internal objects.
  # Core Knowledge: Object influence via contact (bordering), Basic Geometry and Topology priors (relationships).
  is_internal = compose(outer=logical_not, inner=fix_last_argument(function=bordering, fixed_arg=grid))
  return keep_if_condition_and_flatten(container=objects, condition=is_internal)

def fill_grid(grid: Grid, color: Color, patch: FrozenSet) -> Grid:
  # Input: grid (Grid), the input grid; color (Color), the color to fill with; patch (FrozenSet), indices to fill.
  # Goal: Fill the specified indices in the grid with the given color.
  # Output: filled_grid (Grid), the grid after filling the specified indices.
  # Core Knowledge: Object manipulation (painting/filling)
  return fill(grid=grid, color=color, patch=patch)


def solver_virtual_chunked(I):
  # Input: I (Grid), the input grid.
  # Goal: Process the input grid to produce the output grid according to the specified transformation rules.
  # Output: O (Grid), the transformed output grid.
  # Core Knowledge: Compositionality (combining multiple steps to achieve the overall transformation)

  x1 = identify_objects(I)
  x2 = filter_objects_by_color(x1, BLACK)
  x5 = find_internal_objects(x2, I)
  O = fill_grid(I, YELLOW, x5)
  return O
