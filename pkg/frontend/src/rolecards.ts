// Instruction text shown in the role-card panel for the selected node.
// Each card states the behavioral contract the simulated component follows,
// phrased as instructions to the person playing that part.

export interface RoleCard {
  title: string;
  instructions: string[];
}

export const ROLE_CARDS: Record<string, RoleCard> = {
  client: {
    title: "Client",
    instructions: [
      "Submit requests to your entry component, one id per request.",
      "Accept the first successful reply for a request and record its latency.",
      "Hold a failure reply until the timeout expires, then record it.",
      "If the timeout passes with no reply, mark the request timed out and stop trusting that entry while another remains.",
    ],
  },
  layer: {
    title: "Layer",
    instructions: [
      "Accept requests only from the component directly above you, or from clients if you are the top layer.",
      "Work on one request at a time; queue anything that arrives while you are busy.",
      "After your own processing, pass the request to the layer below and wait for its reply before doing anything else.",
      "Return each reply to whoever gave you the request.",
    ],
  },
  filter: {
    title: "Filter",
    instructions: [
      "Take the next item from your inbox, process it, and hand it to the next stage.",
      "Never wait for downstream: once an item leaves, start the next one.",
      "Queue arrivals while busy; order is first in, first out.",
    ],
  },
  sink: {
    title: "Sink",
    instructions: [
      "Receive finished items at the end of the pipeline.",
      "Reply to the originating client so it can record completion.",
    ],
  },
  directory: {
    title: "Directory",
    instructions: [
      "Keep the list of which service instances provide each named service.",
      "On a lookup, pick an instance for the requested service and forward the request after the routing delay.",
      "If you are down, nothing routes: clients that depend on you wait.",
    ],
  },
  service: {
    title: "Service",
    instructions: [
      "Process requests forwarded by the directory, one at a time.",
      "Reply directly to the client named in the request.",
    ],
  },
  leader: {
    title: "Leader",
    instructions: [
      "Receive every request and dispatch it to an idle worker.",
      "If no worker is idle and you are under the limit, start a new one.",
      "Periodically stop workers that have sat idle too long, but never go below the minimum.",
      "Queue requests while all workers are busy.",
    ],
  },
  worker: {
    title: "Worker",
    instructions: [
      "Process whatever the leader hands you and reply to the client.",
      "Report back to the leader when you finish so you can be reused.",
      "Stop when the leader tells you to.",
    ],
  },
  peer: {
    title: "Peer",
    instructions: [
      "If you can handle an arriving request, answer the client directly.",
      "Otherwise decrement its hop budget; if the budget is spent, tell the client the request expired.",
      "Forward fresh requests to a few neighbours; ignore duplicates you have already seen.",
      "Exchange neighbour lists during maintenance rounds to keep the overlay connected.",
    ],
  },
};

export function roleCard(role: string): RoleCard {
  return (
    ROLE_CARDS[role] ?? {
      title: role,
      instructions: ["No instruction card for this role."],
    }
  );
}
