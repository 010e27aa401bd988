#include "physcad/loadcase.hpp"

namespace physcad {

namespace {

Box box(double x0, double y0, double z0, double x1, double y1, double z1)
{
    return {{x0, y0, z0}, {x1, y1, z1}};
}

const Vec3 kDown = -Vec3::UnitZ();

class CaseBuilder {
public:
    CaseBuilder(std::string id, std::string description, Box domain)
    {
        c_.problem_id = std::move(id);
        c_.description = std::move(description);
        c_.domain = domain;
    }

    CaseBuilder& keep_out(Box b)
    {
        c_.keep_out.push_back(b);
        return *this;
    }

    CaseBuilder& fix(std::string id, Box region, std::array<bool, 3> lock = {true, true, true})
    {
        c_.selectors.push_back({id, region});
        c_.boundary_conditions.push_back({std::move(id), lock});
        return *this;
    }

    CaseBuilder& load(std::string id, Box region, double newtons, Vec3 dir = kDown,
                      LoadKind kind = LoadKind::DistributedForce)
    {
        c_.selectors.push_back({id, region});
        // + 0.0 turns negated zeros into plain zeros in the serialized output.
        Vec3 d = dir.normalized().array() + 0.0;
        c_.loads.push_back({std::move(id), kind, newtons, d});
        return *this;
    }

    CaseBuilder& point_load(std::string id, Box region, double newtons, Vec3 dir = kDown)
    {
        return load(std::move(id), region, newtons, dir, LoadKind::PointForce);
    }

    LoadCase build() const
    {
        validate_load_case(c_);
        return c_;
    }

private:
    LoadCase c_;
};

} // namespace

std::vector<LoadCase> builtin_cases()
{
    std::vector<LoadCase> v;

    v.push_back(CaseBuilder("FIXED_BEAM_POINT_LOAD", "Beam clamped at both ends with a load at mid-span.",
                            box(0, 0, 0, 400, 40, 40))
                    .fix("left_end", box(0, 0, 0, 0, 40, 40))
                    .fix("right_end", box(400, 0, 0, 400, 40, 40))
                    .point_load("mid_span", box(190, 0, 40, 210, 40, 40), 12000)
                    .build());

    v.push_back(CaseBuilder("ARCH_BRIDGE", "Deck load carried to two abutments over a clear opening.",
                            box(0, 0, 0, 600, 100, 200))
                    .keep_out(box(100, 0, 0, 500, 100, 120))
                    .fix("left_abutment", box(0, 0, 0, 60, 100, 0))
                    .fix("right_abutment", box(540, 0, 0, 600, 100, 0))
                    .load("deck", box(0, 0, 200, 600, 100, 200), 150000)
                    .build());

    v.push_back(CaseBuilder("BRACKET_INTERNAL_HOLE", "Wall bracket with a mandatory through hole.",
                            box(0, 0, 0, 200, 40, 120))
                    .keep_out(box(80, 0, 40, 120, 40, 80))
                    .fix("wall", box(0, 0, 0, 0, 40, 120))
                    .load("tip", box(170, 0, 120, 200, 40, 120), 6000)
                    .build());

    v.push_back(CaseBuilder("T_BENDING_BEAM", "Clamped beam restricted to a T-shaped envelope.",
                            box(0, 0, 0, 300, 120, 100))
                    .keep_out(box(0, 0, 0, 300, 45, 70))
                    .keep_out(box(0, 75, 0, 300, 120, 70))
                    .fix("left_end", box(0, 0, 0, 0, 120, 100))
                    .fix("right_end", box(300, 0, 0, 300, 120, 100))
                    .load("top_centre", box(140, 0, 100, 160, 120, 100), 40000)
                    .build());

    v.push_back(CaseBuilder("L_BRACKET_DESIGN_SPACE", "Bracket confined to an L-shaped design space.",
                            box(0, 0, 0, 200, 40, 200))
                    .keep_out(box(50, 0, 50, 200, 40, 200))
                    .fix("wall_upper", box(0, 0, 100, 0, 40, 200))
                    .load("arm_tip", box(200, 0, 0, 200, 40, 50), 3000)
                    .build());

    v.push_back(CaseBuilder("A_FRAME", "Two-legged frame carrying an apex load.", box(0, 0, 0, 400, 40, 300))
                    .keep_out(box(80, 0, 0, 320, 40, 180))
                    .keep_out(box(0, 0, 200, 120, 40, 300))
                    .keep_out(box(280, 0, 200, 400, 40, 300))
                    .fix("left_foot", box(0, 0, 0, 40, 40, 0))
                    .fix("right_foot", box(360, 0, 0, 400, 40, 0))
                    .load("apex", box(180, 0, 300, 220, 40, 300), 30000)
                    .build());

    v.push_back(CaseBuilder("CANTILEVER_TIP_LOAD", "Cantilever with a shear load on its free end.",
                            box(0, 0, 0, 300, 40, 60))
                    .fix("root", box(0, 0, 0, 0, 40, 60))
                    .load("tip", box(300, 0, 0, 300, 40, 60), 6000)
                    .build());

    v.push_back(CaseBuilder("SIMPLY_SUPPORTED_BEAM", "Beam on a pin and a roller with a central load.",
                            box(0, 0, 0, 500, 50, 50))
                    .fix("pin", box(0, 0, 0, 20, 50, 0))
                    .fix("roller", box(480, 0, 0, 500, 50, 0), {false, true, true})
                    .load("centre", box(230, 0, 50, 270, 50, 50), 10000)
                    .build());

    v.push_back(CaseBuilder("COLUMN_AXIAL", "Short column under axial compression.", box(0, 0, 0, 60, 60, 400))
                    .fix("base", box(0, 0, 0, 60, 60, 0))
                    .load("cap", box(0, 0, 400, 60, 60, 400), 250000)
                    .build());

    v.push_back(CaseBuilder("HANGER_TENSION", "Hanger suspended from a ceiling carrying a hook load.",
                            box(0, 0, 0, 60, 60, 300))
                    .fix("ceiling", box(0, 0, 300, 60, 60, 300))
                    .load("hook", box(20, 20, 0, 40, 40, 0), 60000)
                    .build());

    v.push_back(CaseBuilder("WALL_SHELF_BRACKET", "Shelf bracket bolted to a wall with a shelf load on top.",
                            box(0, 0, 0, 40, 250, 250))
                    .keep_out(box(0, 80, 0, 40, 250, 120))
                    .fix("wall", box(0, 0, 0, 40, 0, 250))
                    .load("shelf", box(0, 150, 250, 40, 250, 250), 8000)
                    .build());

    v.push_back(CaseBuilder("PORTAL_FRAME", "Portal frame with gravity and lateral loads.", box(0, 0, 0, 500, 50, 300))
                    .keep_out(box(60, 0, 0, 440, 50, 240))
                    .fix("left_foot", box(0, 0, 0, 60, 50, 0))
                    .fix("right_foot", box(440, 0, 0, 500, 50, 0))
                    .load("roof", box(0, 0, 300, 500, 50, 300), 30000)
                    .load("wind", box(0, 0, 240, 0, 50, 300), 3000, Vec3::UnitX())
                    .build());

    v.push_back(CaseBuilder("DOUBLE_ARCH_BRIDGE", "Two-span bridge deck on three piers.", box(0, 0, 0, 800, 100, 200))
                    .keep_out(box(60, 0, 0, 370, 100, 120))
                    .keep_out(box(430, 0, 0, 740, 100, 120))
                    .fix("left_pier", box(0, 0, 0, 60, 100, 0))
                    .fix("centre_pier", box(370, 0, 0, 430, 100, 0))
                    .fix("right_pier", box(740, 0, 0, 800, 100, 0))
                    .load("deck", box(0, 0, 200, 800, 100, 200), 200000)
                    .build());

    v.push_back(CaseBuilder("MOTOR_MOUNT", "Pedestal carrying a motor on a base plate.", box(0, 0, 0, 160, 160, 80))
                    .fix("base", box(0, 0, 0, 160, 160, 0))
                    .load("motor_seat", box(60, 60, 80, 100, 100, 80), 100000)
                    .load("torque_reaction", box(60, 60, 80, 100, 100, 80), 10000, Vec3::UnitX())
                    .build());

    v.push_back(CaseBuilder("PIPE_SADDLE", "Saddle support carrying a pipe over a clear gap.",
                            box(0, 0, 0, 200, 80, 100))
                    .keep_out(box(70, 0, 0, 130, 80, 40))
                    .fix("ground", box(0, 0, 0, 200, 80, 0))
                    .load("cradle", box(40, 0, 100, 160, 80, 100), 120000)
                    .build());

    v.push_back(CaseBuilder("LEVER_ARM", "Lever pinned near one end and loaded at the other.",
                            box(0, 0, 0, 300, 30, 60))
                    .fix("pivot", box(0, 0, 15, 30, 30, 45))
                    .point_load("handle", box(300, 0, 0, 300, 30, 60), 2500)
                    .build());

    v.push_back(CaseBuilder("GUSSET_PLATE", "Corner gusset tying a wall to a loaded arm.", box(0, 0, 0, 200, 20, 200))
                    .keep_out(box(60, 0, 0, 200, 20, 140))
                    .fix("wall", box(0, 0, 0, 0, 20, 200))
                    .load("arm_end", box(160, 0, 200, 200, 20, 200), 3000)
                    .build());

    v.push_back(CaseBuilder("SIGN_POST", "Post with a wind load on the sign at its top.", box(0, 0, 0, 60, 60, 600))
                    .fix("footing", box(0, 0, 0, 60, 60, 0))
                    .load("sign", box(0, 0, 500, 0, 60, 600), 3000, Vec3::UnitX())
                    .build());

    v.push_back(CaseBuilder("CRANE_JIB", "Wall-mounted jib with a hook load at the outer end.",
                            box(0, 0, 0, 600, 60, 120))
                    .fix("mast", box(0, 0, 0, 0, 60, 120))
                    .load("hook", box(560, 0, 0, 600, 60, 0), 5000)
                    .build());

    v.push_back(CaseBuilder("BEARING_BLOCK", "Pillow block on two feet with a bore for a shaft.",
                            box(0, 0, 0, 160, 60, 100))
                    .keep_out(box(60, 0, 40, 100, 60, 70))
                    .fix("left_foot", box(0, 0, 0, 30, 60, 0))
                    .fix("right_foot", box(130, 0, 0, 160, 60, 0))
                    .load("cap", box(60, 0, 100, 100, 60, 100), 60000)
                    .build());

    return v;
}

LoadCase example_case()
{
    return CaseBuilder("SHELF_PLATE_EXAMPLE", "Plate cantilevered from a wall with a load near its end.",
                       box(0, 0, 0, 120, 30, 60))
        .fix("wall", box(0, 0, 0, 0, 30, 60))
        .load("end_top", box(100, 0, 60, 120, 30, 60), 2000)
        .build();
}

} // namespace physcad
