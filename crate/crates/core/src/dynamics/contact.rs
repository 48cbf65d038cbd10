//! Penalty ground contact with an anchored stick–slip friction spring.

use super::kinematics::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactParams {
    pub normal_stiffness: f64,
    pub normal_damping: f64,
    pub tangential_stiffness: f64,
    pub tangential_damping: f64,
    pub friction: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum ContactState {
    #[default]
    Airborne,
    Penetrating {
        depth: f64,
        anchor_x: f64,
    },
}

impl ContactState {
    pub fn in_contact(&self) -> bool {
        matches!(self, ContactState::Penetrating { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContactPoint {
    Heel,
    Metatarsal,
    ToeTip,
}

impl ContactPoint {
    pub const ALL: [ContactPoint; 3] = [
        ContactPoint::Heel,
        ContactPoint::Metatarsal,
        ContactPoint::ToeTip,
    ];
}

/// Ground reaction on a point at `pos` moving with `vel`, and the updated
/// contact state. The ground is the plane z = 0.
pub fn contact_force(
    pos: Vec2,
    vel: Vec2,
    state: ContactState,
    params: &ContactParams,
) -> (Vec2, ContactState) {
    if pos.y >= 0.0 {
        return (Vec2::zeros(), ContactState::Airborne);
    }
    let depth = -pos.y;
    let normal = (params.normal_stiffness * depth - params.normal_damping * vel.y).max(0.0);
    let anchor = match state {
        ContactState::Penetrating { anchor_x, .. } => anchor_x,
        ContactState::Airborne => pos.x,
    };
    let mut tangential =
        -params.tangential_stiffness * (pos.x - anchor) - params.tangential_damping * vel.x;
    let limit = params.friction * normal;
    let mut anchor_x = anchor;
    if tangential.abs() > limit {
        tangential = limit.copysign(tangential);
        // slide the anchor so the stick spring sits at the friction limit
        anchor_x = if params.tangential_stiffness > 0.0 {
            pos.x + tangential / params.tangential_stiffness
        } else {
            pos.x
        };
    }
    (
        Vec2::new(tangential, normal),
        ContactState::Penetrating { depth, anchor_x },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params() -> ContactParams {
        ContactParams {
            normal_stiffness: 2.0e4,
            normal_damping: 40.0,
            tangential_stiffness: 2.0e4,
            tangential_damping: 40.0,
            friction: 0.8,
        }
    }

    #[test]
    fn airborne_point_feels_nothing() {
        let (f, s) = contact_force(
            Vec2::new(0.1, 0.01),
            Vec2::new(1.0, -1.0),
            ContactState::Airborne,
            &params(),
        );
        assert_eq!(f, Vec2::zeros());
        assert_eq!(s, ContactState::Airborne);
    }

    #[test]
    fn static_penetration_is_a_spring() {
        let (f, s) = contact_force(
            Vec2::new(0.1, -0.001),
            Vec2::zeros(),
            ContactState::Airborne,
            &params(),
        );
        assert_relative_eq!(f.y, 20.0, epsilon = 1e-12);
        assert_eq!(f.x, 0.0);
        assert!(matches!(s, ContactState::Penetrating { anchor_x, .. } if anchor_x == 0.1));
    }

    #[test]
    fn sliding_is_capped_by_coulomb() {
        let state = ContactState::Penetrating {
            depth: 0.001,
            anchor_x: 0.0,
        };
        let (f, s) = contact_force(Vec2::new(0.05, -0.001), Vec2::zeros(), state, &params());
        assert_relative_eq!(f.x, -0.8 * 20.0, epsilon = 1e-12);
        match s {
            ContactState::Penetrating { anchor_x, .. } => {
                assert_relative_eq!(anchor_x, 0.05 - 16.0 / 2.0e4, epsilon = 1e-12)
            }
            _ => panic!("lost contact"),
        }
    }

    proptest! {
        #[test]
        fn never_pulls_the_foot_down(
            x in -1.0f64..1.0, z in -0.01f64..0.01,
            vx in -3.0f64..3.0, vz in -3.0f64..3.0,
            anchor in -1.0f64..1.0,
        ) {
            let state = ContactState::Penetrating { depth: 0.0, anchor_x: anchor };
            let (f, _) = contact_force(Vec2::new(x, z), Vec2::new(vx, vz), state, &params());
            prop_assert!(f.y >= 0.0);
            prop_assert!(f.x.abs() <= 0.8 * f.y + 1e-12);
        }
    }
}
