//! Domain definitions for the generated families.

pub const GRIPPER: &str = "\
(define (domain gripper)
  (:requirements :strips :typing)
  (:types room ball gripper)
  (:predicates (at-robby ?r - room)
               (at ?b - ball ?r - room)
               (free ?g - gripper)
               (carry ?b - ball ?g - gripper))
  (:action move
    :parameters (?from - room ?to - room)
    :precondition (at-robby ?from)
    :effect (and (at-robby ?to) (not (at-robby ?from))))
  (:action pick
    :parameters (?b - ball ?r - room ?g - gripper)
    :precondition (and (at ?b ?r) (at-robby ?r) (free ?g))
    :effect (and (carry ?b ?g) (not (at ?b ?r)) (not (free ?g))))
  (:action drop
    :parameters (?b - ball ?r - room ?g - gripper)
    :precondition (and (carry ?b ?g) (at-robby ?r))
    :effect (and (at ?b ?r) (free ?g) (not (carry ?b ?g)))))
";

// The hand is an object so that every predicate has arity 1 or 2.
pub const BLOCKS: &str = "\
(define (domain blocks)
  (:requirements :strips :typing)
  (:types block robot)
  (:predicates (on ?x - block ?y - block)
               (ontable ?x - block)
               (clear ?x - block)
               (handempty ?r - robot)
               (holding ?r - robot ?x - block))
  (:action pickup
    :parameters (?x - block ?r - robot)
    :precondition (and (clear ?x) (ontable ?x) (handempty ?r))
    :effect (and (holding ?r ?x) (not (ontable ?x)) (not (clear ?x)) (not (handempty ?r))))
  (:action putdown
    :parameters (?x - block ?r - robot)
    :precondition (holding ?r ?x)
    :effect (and (ontable ?x) (clear ?x) (handempty ?r) (not (holding ?r ?x))))
  (:action stack
    :parameters (?x - block ?y - block ?r - robot)
    :precondition (and (holding ?r ?x) (clear ?y))
    :effect (and (on ?x ?y) (clear ?x) (handempty ?r) (not (holding ?r ?x)) (not (clear ?y))))
  (:action unstack
    :parameters (?x - block ?y - block ?r - robot)
    :precondition (and (on ?x ?y) (clear ?x) (handempty ?r))
    :effect (and (holding ?r ?x) (clear ?y) (not (on ?x ?y)) (not (clear ?x)) (not (handempty ?r)))))
";

pub const FERRY: &str = "\
(define (domain ferry)
  (:requirements :strips :typing)
  (:types car location ferry)
  (:predicates (at-ferry ?f - ferry ?l - location)
               (at ?c - car ?l - location)
               (empty-ferry ?f - ferry)
               (on ?c - car ?f - ferry))
  (:action sail
    :parameters (?f - ferry ?from - location ?to - location)
    :precondition (at-ferry ?f ?from)
    :effect (and (at-ferry ?f ?to) (not (at-ferry ?f ?from))))
  (:action board
    :parameters (?c - car ?l - location ?f - ferry)
    :precondition (and (at ?c ?l) (at-ferry ?f ?l) (empty-ferry ?f))
    :effect (and (on ?c ?f) (not (at ?c ?l)) (not (empty-ferry ?f))))
  (:action debark
    :parameters (?c - car ?l - location ?f - ferry)
    :precondition (and (on ?c ?f) (at-ferry ?f ?l))
    :effect (and (at ?c ?l) (empty-ferry ?f) (not (on ?c ?f)))))
";

// Disks and pegs are both places a disk can rest on.
pub const HANOI: &str = "\
(define (domain hanoi)
  (:requirements :strips :typing)
  (:types place - object
          disk peg - place)
  (:predicates (on ?d - disk ?p - place)
               (clear ?p - place)
               (smaller ?p - place ?d - disk))
  (:action move
    :parameters (?d - disk ?from - place ?to - place)
    :precondition (and (on ?d ?from) (clear ?d) (clear ?to) (smaller ?to ?d))
    :effect (and (on ?d ?to) (clear ?from) (not (on ?d ?from)) (not (clear ?to)))))
";
